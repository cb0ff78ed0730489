// Copyright 2026 the graphguard authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Small XML subset, just enough for policy and permissions documents:
// elements, ordered attributes, character data, comments and the
// declaration. No namespaces, DTDs or processing instructions. Elements
// remember their source line so schema diagnostics can point at it.

#ifndef GRAPHGUARD_XML_HPP_
#define GRAPHGUARD_XML_HPP_

#include <cctype>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "graphguard/bytes.hpp"

namespace graphguard::xml {

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct Element {
  std::string name;
  std::vector<std::pair<std::string, std::string>> attributes;
  std::vector<Element> children;
  std::string text;
  int line = 1;

  const std::string* attr(std::string_view key) const {
    for (const auto& [k, v] : attributes) {
      if (k == key) return &v;
    }
    return nullptr;
  }

  const Element* child(std::string_view child_name) const {
    for (const auto& c : children) {
      if (c.name == child_name) return &c;
    }
    return nullptr;
  }

  std::vector<const Element*> children_named(std::string_view child_name) const {
    std::vector<const Element*> out;
    for (const auto& c : children) {
      if (c.name == child_name) out.push_back(&c);
    }
    return out;
  }
};

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Element parse_document() {
    skip_misc();
    if (at_end()) throw ParseError(line_, "document has no root element");
    Element root = parse_element();
    skip_misc();
    if (!at_end()) throw ParseError(line_, "content after the root element");
    return root;
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  char take() {
    char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }

  bool consume(std::string_view token) {
    if (text_.compare(pos_, token.size(), token) != 0) return false;
    for (size_t i = 0; i < token.size(); ++i) take();
    return true;
  }

  void skip_whitespace() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(peek()))) {
      take();
    }
  }

  /// Whitespace, comments and the <?xml?> declaration between elements.
  void skip_misc() {
    for (;;) {
      skip_whitespace();
      if (consume("<!--")) {
        while (!at_end() && !consume("-->")) take();
        continue;
      }
      if (text_.compare(pos_, 2, "<?") == 0) {
        while (!at_end() && !consume("?>")) take();
        continue;
      }
      return;
    }
  }

  std::string parse_name() {
    std::string name;
    while (!at_end()) {
      char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
          c == '-' || c == '.' || c == ':') {
        name.push_back(take());
      } else {
        break;
      }
    }
    if (name.empty()) throw ParseError(line_, "expected a name");
    return name;
  }

  std::string decode_entities(const std::string& raw) {
    std::string out;
    for (size_t i = 0; i < raw.size(); ++i) {
      if (raw[i] != '&') {
        out.push_back(raw[i]);
        continue;
      }
      size_t semi = raw.find(';', i);
      if (semi == std::string::npos) {
        throw ParseError(line_, "unterminated entity reference");
      }
      std::string entity = raw.substr(i + 1, semi - i - 1);
      if (entity == "lt") out.push_back('<');
      else if (entity == "gt") out.push_back('>');
      else if (entity == "amp") out.push_back('&');
      else if (entity == "quot") out.push_back('"');
      else if (entity == "apos") out.push_back('\'');
      else if (!entity.empty() && entity[0] == '#') {
        int code = std::stoi(entity.substr(entity[1] == 'x' ? 2 : 1), nullptr,
                             entity[1] == 'x' ? 16 : 10);
        out.push_back(static_cast<char>(code));
      } else {
        throw ParseError(line_, "unknown entity '&" + entity + ";'");
      }
      i = semi;
    }
    return out;
  }

  Element parse_element() {
    if (!consume("<")) throw ParseError(line_, "expected '<'");
    Element el;
    el.line = line_;
    el.name = parse_name();
    for (;;) {
      skip_whitespace();
      if (at_end()) throw ParseError(line_, "unterminated start tag");
      if (consume("/>")) return el;
      if (consume(">")) break;
      std::string key = parse_name();
      skip_whitespace();
      if (!consume("=")) throw ParseError(line_, "attribute without '='");
      skip_whitespace();
      if (at_end() || (peek() != '"' && peek() != '\'')) {
        throw ParseError(line_, "attribute value must be quoted");
      }
      char quote = take();
      std::string value;
      while (!at_end() && peek() != quote) value.push_back(take());
      if (at_end()) throw ParseError(line_, "unterminated attribute value");
      take();
      el.attributes.emplace_back(key, decode_entities(value));
    }
    // Content: character data and child elements until the end tag.
    std::string raw_text;
    for (;;) {
      if (at_end()) {
        throw ParseError(el.line, "element '" + el.name + "' never closed");
      }
      if (consume("<!--")) {
        while (!at_end() && !consume("-->")) take();
        continue;
      }
      if (text_.compare(pos_, 2, "</") == 0) {
        consume("</");
        std::string closing = parse_name();
        if (closing != el.name) {
          throw ParseError(line_, "expected </" + el.name + ">, found </" +
                                      closing + ">");
        }
        skip_whitespace();
        if (!consume(">")) throw ParseError(line_, "malformed end tag");
        break;
      }
      if (peek() == '<') {
        el.children.push_back(parse_element());
        continue;
      }
      raw_text.push_back(take());
    }
    std::string decoded = decode_entities(raw_text);
    size_t begin = decoded.find_first_not_of(" \t\r\n");
    if (begin != std::string::npos) {
      size_t end = decoded.find_last_not_of(" \t\r\n");
      el.text = decoded.substr(begin, end - begin + 1);
    }
    return el;
  }

  std::string_view text_;
  size_t pos_ = 0;
  int line_ = 1;
};

inline std::string escape(const std::string& raw, bool in_attribute) {
  std::string out;
  for (char c : raw) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += in_attribute ? "&quot;" : "\""; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline void serialize_into(const Element& el, std::ostringstream& os,
                           int depth) {
  std::string indent(static_cast<size_t>(depth) * 2, ' ');
  os << indent << "<" << el.name;
  for (const auto& [k, v] : el.attributes) {
    os << " " << k << "=\"" << escape(v, true) << "\"";
  }
  if (el.children.empty() && el.text.empty()) {
    os << "/>\n";
    return;
  }
  if (el.children.empty()) {
    os << ">" << escape(el.text, false) << "</" << el.name << ">\n";
    return;
  }
  os << ">\n";
  for (const auto& c : el.children) serialize_into(c, os, depth + 1);
  os << indent << "</" << el.name << ">\n";
}

}  // namespace detail

inline Element parse(std::string_view text) {
  return detail::Parser(text).parse_document();
}

/// Pretty-prints with a declaration and two-space indentation. Mixed
/// content is not round-tripped; policy documents never need it.
inline std::string serialize(const Element& root) {
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  detail::serialize_into(root, os, 0);
  return os.str();
}

}  // namespace graphguard::xml

#endif  // GRAPHGUARD_XML_HPP_
