#pragma once

// Nested key-value text format shared by model files and configs.
//
//   key value
//   group {
//     key value ...
//   }
//
// Scalars round-trip exactly: doubles are written as C hex-float literals.

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "netsynth/numlin.hpp"

namespace netsynth::textio {

class Node {
 public:
  Node() = default;
  explicit Node(std::string name) : name_(std::move(name)) {}

  const std::string& name() const { return name_; }

  Node& add_child(const std::string& name);
  void set(const std::string& key, const std::string& value);
  void set_int(const std::string& key, long long v);
  void set_double(const std::string& key, double v);
  void set_matrix(const std::string& key, const Mat& m);

  bool has(const std::string& key) const;
  const std::string& get(const std::string& key) const;
  long long get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  Mat get_matrix(const std::string& key) const;

  std::vector<const Node*> children(const std::string& name) const;
  const Node* child(const std::string& name) const;  // first or null
  const std::vector<std::unique_ptr<Node>>& all_children() const { return children_; }

  std::string to_string() const;

 private:
  void write(std::string& out, int indent) const;

  std::string name_;
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<std::unique_ptr<Node>> children_;
};

std::string format_double(double v);
double parse_double(const std::string& s);

Node parse(const std::string& text);
Node load_file(const std::string& path);
void save_file(const Node& node, const std::string& path);

}  // namespace netsynth::textio
