#include "netsynth/textio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace netsynth::textio {

Node& Node::add_child(const std::string& name) {
  children_.push_back(std::make_unique<Node>(name));
  return *children_.back();
}

void Node::set(const std::string& key, const std::string& value) {
  entries_.emplace_back(key, value);
}

void Node::set_int(const std::string& key, long long v) {
  set(key, std::to_string(v));
}

void Node::set_double(const std::string& key, double v) {
  set(key, format_double(v));
}

void Node::set_matrix(const std::string& key, const Mat& m) {
  std::string s = std::to_string(m.rows()) + " " + std::to_string(m.cols());
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) s += " " + format_double(m(i, j));
  set(key, s);
}

bool Node::has(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return true;
  return false;
}

const std::string& Node::get(const std::string& key) const {
  for (const auto& [k, v] : entries_)
    if (k == key) return v;
  throw std::invalid_argument("textio: missing key '" + key + "' in node '" + name_ + "'");
}

long long Node::get_int(const std::string& key) const { return std::stoll(get(key)); }

double Node::get_double(const std::string& key) const { return parse_double(get(key)); }

double Node::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

Mat Node::get_matrix(const std::string& key) const {
  std::istringstream is(get(key));
  int rows = 0, cols = 0;
  is >> rows >> cols;
  if (!is || rows < 0 || cols < 0)
    throw std::invalid_argument("textio: bad matrix header for key '" + key + "'");
  Mat m(rows, cols);
  std::string tok;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      if (!(is >> tok))
        throw std::invalid_argument("textio: truncated matrix for key '" + key + "'");
      m(i, j) = parse_double(tok);
    }
  return m;
}

std::vector<const Node*> Node::children(const std::string& name) const {
  std::vector<const Node*> out;
  for (const auto& c : children_)
    if (c->name() == name) out.push_back(c.get());
  return out;
}

const Node* Node::child(const std::string& name) const {
  for (const auto& c : children_)
    if (c->name() == name) return c.get();
  return nullptr;
}

void Node::write(std::string& out, int indent) const {
  const std::string pad(2 * indent, ' ');
  for (const auto& [k, v] : entries_) out += pad + k + " " + v + "\n";
  for (const auto& c : children_) {
    out += pad + c->name() + " {\n";
    c->write(out, indent + 1);
    out += pad + "}\n";
  }
}

std::string Node::to_string() const {
  std::string out;
  write(out, 0);
  return out;
}

std::string format_double(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

double parse_double(const std::string& s) {
  return std::strtod(s.c_str(), nullptr);
}

Node parse(const std::string& text) {
  Node root("root");
  std::vector<Node*> stack{&root};
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    std::string body = line.substr(first);
    if (body[0] == '#') continue;
    if (body == "}") {
      if (stack.size() <= 1)
        throw std::invalid_argument("textio: unmatched '}' at line " + std::to_string(lineno));
      stack.pop_back();
      continue;
    }
    const auto sp = body.find_first_of(" \t");
    if (sp == std::string::npos)
      throw std::invalid_argument("textio: bare token at line " + std::to_string(lineno));
    std::string key = body.substr(0, sp);
    std::string rest = body.substr(sp + 1);
    const auto rs = rest.find_first_not_of(" \t");
    rest = (rs == std::string::npos) ? "" : rest.substr(rs);
    while (!rest.empty() && (rest.back() == '\r' || rest.back() == ' ' || rest.back() == '\t'))
      rest.pop_back();
    if (rest == "{") {
      stack.push_back(&stack.back()->add_child(key));
    } else {
      stack.back()->set(key, rest);
    }
  }
  if (stack.size() != 1) throw std::invalid_argument("textio: unterminated group");
  return root;
}

Node load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("textio: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void save_file(const Node& node, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("textio: cannot write '" + path + "'");
  out << node.to_string();
}

}  // namespace netsynth::textio
