#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace homoglab {

/// Arithmetic expression over the cell variables y1, y2.
///
/// Grammar: numbers, `pi`, `y1`, `y2`, `+ - * / ^`, parentheses and the
/// functions sin, cos, exp. Parsed once; evaluation is pure and thread-safe.
class Expression {
 public:
  static Expression parse(std::string_view text);

  double operator()(double y1, double y2) const;
  const std::string& source() const { return source_; }

  struct Node;

 private:
  Expression(std::shared_ptr<const Node> root, std::string source)
      : root_(std::move(root)), source_(std::move(source)) {}

  std::shared_ptr<const Node> root_;
  std::string source_;
};

}  // namespace homoglab
