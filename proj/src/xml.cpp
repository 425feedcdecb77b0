#include "mtalk/xml.hpp"

#include <algorithm>
#include <utility>

#include <fmt/format.h>

namespace mtalk::xml {

const Attribute* Element::attribute(std::string_view attrName) const {
  for (const auto& a : attributes)
    if (a.name == attrName) return &a;
  return nullptr;
}

std::string Element::text() const {
  std::string out;
  for (const auto& t : texts) out += t.value;
  return out;
}

bool Element::hasNonWhitespaceText() const {
  for (const auto& t : texts)
    if (!trim_xml_whitespace(t.value).empty()) return true;
  return false;
}

bool is_xml_whitespace(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

std::string_view trim_xml_whitespace(std::string_view s) {
  while (!s.empty() && is_xml_whitespace(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_xml_whitespace(s.back())) s.remove_suffix(1);
  return s;
}

namespace {

bool is_name_start(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_' || c == ':' || c >= 0x80;
}

bool is_name_char(unsigned char c) {
  return is_name_start(c) || (c >= '0' && c <= '9') || c == '-' || c == '.';
}

void append_utf8(std::string& out, unsigned long cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

struct Position {
  std::size_t offset = 0;
  int line = 1;
  int column = 1;
};

struct Scope {
  std::vector<std::pair<std::string, std::string>> bindings;  // prefix -> uri
};

class Parser {
 public:
  Parser(std::string_view text, const std::string& path, const ParseOptions& options)
      : text_(text), path_(path), options_(options) {}

  Document run();

 private:
  // -- cursor
  bool eof() const { return pos_.offset >= text_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_.offset + ahead < text_.size() ? text_[pos_.offset + ahead] : '\0';
  }
  bool starts_with(std::string_view s) const {
    return text_.substr(pos_.offset).substr(0, s.size()) == s;
  }
  void advance(std::size_t n = 1) {
    for (std::size_t i = 0; i < n && !eof(); ++i) {
      if (text_[pos_.offset] == '\n') {
        ++pos_.line;
        pos_.column = 1;
      } else {
        ++pos_.column;
      }
      ++pos_.offset;
    }
  }
  void skip_ws() {
    while (!eof() && is_xml_whitespace(peek())) advance();
  }
  SourceSpan span_from(const Position& start) const {
    return SourceSpan{path_, start.line, start.column, pos_.line, pos_.column, start.offset,
                      pos_.offset};
  }

  // -- problems
  void problem(std::string message, SourceSpan span);

  // -- tokens
  void parse_markup();
  void parse_text();
  void parse_start_tag();
  void parse_end_tag();
  std::string read_name();
  std::string decode(std::string_view raw, const SourceSpan& where);

  void open_element(Element el, bool selfClosing);
  void close_top(const Position& endPos);
  void resolve_namespace(Element& el);

  std::string_view text_;
  const std::string& path_;
  const ParseOptions& options_;
  Position pos_;
  std::vector<Element> stack_;
  std::vector<Scope> scopes_;
  Document doc_;
  bool rootClosed_ = false;
  int extraRoots_ = 0;
};

void Parser::problem(std::string message, SourceSpan span) {
  if (stack_.size() >= 2) {
    for (std::size_t i = 1; i < stack_.size(); ++i) {
      auto& el = stack_[i];
      el.malformed = true;
      if (!el.firstProblem) el.firstProblem = Problem{message, span};
    }
    return;
  }
  if (!stack_.empty()) {
    stack_[0].malformed = true;
    if (!stack_[0].firstProblem) stack_[0].firstProblem = Problem{message, span};
  }
  doc_.problems.push_back(Problem{std::move(message), std::move(span)});
}

std::string Parser::read_name() {
  std::string name;
  if (eof() || !is_name_start(static_cast<unsigned char>(peek()))) return name;
  while (!eof() && is_name_char(static_cast<unsigned char>(peek()))) {
    name += peek();
    advance();
  }
  return name;
}

namespace {

// Span of raw[i, i + len) given the span of all of `raw`.
SourceSpan sub_span(const SourceSpan& whole, std::string_view raw, std::size_t i, std::size_t len) {
  SourceSpan s = whole;
  s.offset = whole.offset + i;
  s.endOffset = s.offset + len;
  for (std::size_t k = 0; k < i; ++k) {
    if (raw[k] == '\n') {
      ++s.line;
      s.column = 1;
    } else {
      ++s.column;
    }
  }
  s.endLine = s.line;
  s.endColumn = s.column + static_cast<int>(len);
  return s;
}

}  // namespace

std::string Parser::decode(std::string_view raw, const SourceSpan& whole) {
  std::string out;
  out.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    char c = raw[i];
    if (c != '&') {
      out += c;
      continue;
    }
    auto semi = raw.find(';', i);
    if (semi == std::string_view::npos || semi - i > 12) {
      problem("unescaped '&' (use &amp;)", sub_span(whole, raw, i, 1));
      out += c;
      continue;
    }
    std::string_view ent = raw.substr(i + 1, semi - i - 1);
    const SourceSpan where = sub_span(whole, raw, i, semi - i + 1);
    if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "amp") out += '&';
    else if (ent == "quot") out += '"';
    else if (ent == "apos") out += '\'';
    else if (!ent.empty() && ent[0] == '#') {
      unsigned long cp = 0;
      bool ok = ent.size() > 1;
      bool hex = ok && (ent[1] == 'x');
      for (std::size_t k = hex ? 2 : 1; ok && k < ent.size(); ++k) {
        char d = ent[k];
        int v = -1;
        if (d >= '0' && d <= '9') v = d - '0';
        else if (hex && d >= 'a' && d <= 'f') v = d - 'a' + 10;
        else if (hex && d >= 'A' && d <= 'F') v = d - 'A' + 10;
        if (v < 0) ok = false;
        else cp = cp * (hex ? 16 : 10) + static_cast<unsigned long>(v);
        if (cp > 0x10FFFF) ok = false;
      }
      if (hex && ent.size() == 2) ok = false;
      if (!ok || cp == 0) {
        problem(fmt::format("invalid character reference '&{};'", ent), where);
        out.append(raw.substr(i, semi - i + 1));
      } else {
        append_utf8(out, cp);
      }
    } else {
      problem(fmt::format("unknown entity '&{};'", ent), where);
      out.append(raw.substr(i, semi - i + 1));
    }
    i = semi;
  }
  return out;
}

void Parser::resolve_namespace(Element& el) {
  Scope scope;
  for (const auto& a : el.attributes) {
    if (a.name == "xmlns") scope.bindings.emplace_back("", a.value);
    else if (a.name.rfind("xmlns:", 0) == 0) scope.bindings.emplace_back(a.name.substr(6), a.value);
  }
  scopes_.push_back(std::move(scope));
  std::string prefix;
  auto colon = el.name.find(':');
  if (colon == std::string::npos) {
    el.localName = el.name;
  } else {
    prefix = el.name.substr(0, colon);
    el.localName = el.name.substr(colon + 1);
  }
  for (auto it = scopes_.rbegin(); it != scopes_.rend(); ++it) {
    for (const auto& [p, uri] : it->bindings) {
      if (p == prefix) {
        el.nsUri = uri;
        return;
      }
    }
  }
  if (!prefix.empty() && prefix != "xml")
    problem(fmt::format("unbound namespace prefix '{}'", prefix), el.nameSpan);
}

void Parser::open_element(Element el, bool selfClosing) {
  if (stack_.empty()) {
    if (rootClosed_ || doc_.root) {
      ++extraRoots_;
      problem(fmt::format("content after the root element: <{}>", el.name), el.nameSpan);
    }
  } else if (stack_.size() >= 2 &&
             std::find(options_.resyncAtDepthOne.begin(), options_.resyncAtDepthOne.end(),
                       el.name) != options_.resyncAtDepthOne.end()) {
    problem(fmt::format("<{}> is not closed before <{}>", stack_[1].name, el.name), el.nameSpan);
    Position here{el.span.offset, el.span.line, el.span.column};
    while (stack_.size() > 1) close_top(here);
  }
  stack_.push_back(std::move(el));
  Element& top = stack_.back();
  for (auto& a : top.attributes) a.value = decode(a.value, a.valueSpan);
  resolve_namespace(top);
  if (selfClosing) close_top(pos_);
}

void Parser::close_top(const Position& endPos) {
  Element el = std::move(stack_.back());
  stack_.pop_back();
  scopes_.pop_back();
  el.span.endLine = endPos.line;
  el.span.endColumn = endPos.column;
  el.span.endOffset = endPos.offset;
  if (stack_.empty()) {
    if (!doc_.root && !rootClosed_ && extraRoots_ == 0) doc_.root = std::move(el);
    rootClosed_ = true;
    return;
  }
  stack_.back().children.push_back(std::move(el));
}

void Parser::parse_start_tag() {
  Position start = pos_;
  advance();  // '<'
  Position nameStart = pos_;
  std::string name = read_name();
  if (name.empty()) {
    advance();
    problem("expected an element name after '<'", span_from(start));
    return;
  }
  Element el;
  el.name = name;
  el.nameSpan = span_from(nameStart);
  bool bad = false;
  std::string badMessage;
  bool selfClosing = false;
  bool terminated = false;
  while (!eof()) {
    skip_ws();
    if (starts_with("/>")) {
      advance(2);
      selfClosing = true;
      terminated = true;
      break;
    }
    if (peek() == '>') {
      advance();
      terminated = true;
      break;
    }
    if (peek() == '<') break;
    Position attrStart = pos_;
    std::string attrName = read_name();
    if (attrName.empty()) {
      bad = true;
      if (badMessage.empty()) badMessage = fmt::format("unexpected character '{}' in tag <{}>", peek(), name);
      advance();
      continue;
    }
    SourceSpan attrNameSpan = span_from(attrStart);
    skip_ws();
    if (peek() != '=') {
      bad = true;
      if (badMessage.empty()) badMessage = fmt::format("attribute '{}' has no value", attrName);
      continue;
    }
    advance();
    skip_ws();
    char quote = peek();
    if (quote != '"' && quote != '\'') {
      bad = true;
      if (badMessage.empty()) badMessage = fmt::format("attribute '{}' value is not quoted", attrName);
      continue;
    }
    advance();
    Position valueStart = pos_;
    while (!eof() && peek() != quote && peek() != '<') advance();
    SourceSpan valueSpan = span_from(valueStart);
    if (peek() != quote) {
      bad = true;
      if (badMessage.empty()) badMessage = fmt::format("unterminated value for attribute '{}'", attrName);
      continue;
    }
    std::string_view raw = text_.substr(valueStart.offset, pos_.offset - valueStart.offset);
    advance();
    if (el.attribute(attrName)) {
      bad = true;
      if (badMessage.empty()) badMessage = fmt::format("duplicate attribute '{}'", attrName);
      continue;
    }
    Attribute attr;
    attr.name = std::move(attrName);
    attr.nameSpan = attrNameSpan;
    attr.valueSpan = valueSpan;
    attr.value = std::string(raw);  // decoded once the element is open
    el.attributes.push_back(std::move(attr));
  }
  if (!terminated) {
    bad = true;
    if (badMessage.empty()) badMessage = fmt::format("start tag <{}> is not terminated", name);
  }
  el.span = span_from(start);
  SourceSpan tagSpan = el.span;
  open_element(std::move(el), false);
  // The element is on the stack now, so the problem is attributed to it.
  if (bad) problem(badMessage, tagSpan);
  if (selfClosing) close_top(pos_);
}

void Parser::parse_end_tag() {
  Position start = pos_;
  advance(2);  // '</'
  Position nameStart = pos_;
  std::string name = read_name();
  SourceSpan nameSpan = span_from(nameStart);
  skip_ws();
  bool terminated = peek() == '>';
  if (terminated) advance();
  SourceSpan tagSpan = span_from(start);
  if (name.empty()) {
    problem("expected an element name in end tag", tagSpan);
    return;
  }
  if (!terminated) problem(fmt::format("end tag </{}> is not terminated", name), tagSpan);
  if (stack_.empty()) {
    problem(fmt::format("unexpected end tag </{}>", name), tagSpan);
    return;
  }
  if (stack_.back().name == name) {
    stack_.back().closeNameSpan = nameSpan;
    close_top(pos_);
    return;
  }
  auto it = std::find_if(stack_.rbegin(), stack_.rend(),
                         [&](const Element& e) { return e.name == name; });
  if (it == stack_.rend()) {
    problem(fmt::format("end tag </{}> does not match <{}>", name, stack_.back().name), tagSpan);
    return;
  }
  problem(fmt::format("element <{}> is not closed", stack_.back().name), tagSpan);
  std::size_t depth = static_cast<std::size_t>(std::distance(it, stack_.rend())) - 1;
  while (stack_.size() > depth + 1) close_top(start);
  stack_.back().closeNameSpan = nameSpan;
  close_top(pos_);
}

void Parser::parse_markup() {
  Position start = pos_;
  if (starts_with("<!--")) {
    auto end = text_.find("-->", pos_.offset + 4);
    if (end == std::string_view::npos) {
      advance(text_.size() - pos_.offset);
      problem("unterminated comment", span_from(start));
      return;
    }
    advance(end + 3 - pos_.offset);
    return;
  }
  if (starts_with("<![CDATA[")) {
    auto end = text_.find("]]>", pos_.offset + 9);
    std::size_t stop = end == std::string_view::npos ? text_.size() : end;
    advance(9);
    Position contentStart = pos_;
    std::string content(text_.substr(pos_.offset, stop - pos_.offset));
    advance(stop - pos_.offset);
    SourceSpan contentSpan = span_from(contentStart);
    if (end == std::string_view::npos) {
      problem("unterminated CDATA section", span_from(start));
    } else {
      advance(3);
    }
    if (stack_.empty()) {
      problem("character data outside the root element", contentSpan);
    } else {
      stack_.back().texts.push_back(Text{std::move(content), contentSpan});
    }
    return;
  }
  if (starts_with("<?")) {
    auto end = text_.find("?>", pos_.offset + 2);
    if (end == std::string_view::npos) {
      advance(text_.size() - pos_.offset);
      problem("unterminated processing instruction", span_from(start));
      return;
    }
    advance(end + 2 - pos_.offset);
    return;
  }
  if (starts_with("<!")) {
    auto end = text_.find('>', pos_.offset);
    advance((end == std::string_view::npos ? text_.size() : end + 1) - pos_.offset);
    problem("document type declarations are not supported", span_from(start));
    return;
  }
  if (starts_with("</")) {
    parse_end_tag();
    return;
  }
  parse_start_tag();
}

void Parser::parse_text() {
  Position start = pos_;
  auto next = text_.find('<', pos_.offset);
  std::size_t stop = next == std::string_view::npos ? text_.size() : next;
  std::string_view raw = text_.substr(pos_.offset, stop - pos_.offset);
  advance(stop - pos_.offset);
  SourceSpan span = span_from(start);
  if (stack_.empty()) {
    if (!trim_xml_whitespace(raw).empty()) problem("text outside the root element", span);
    return;
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto c = static_cast<unsigned char>(raw[i]);
    if (c < 0x20 && c != '\t' && c != '\n' && c != '\r') {
      problem(fmt::format("illegal control character U+{:04X}", c), sub_span(span, raw, i, 1));
      break;
    }
  }
  std::string value = decode(raw, span);
  stack_.back().texts.push_back(Text{std::move(value), span});
}

Document Parser::run() {
  if (starts_with("\xEF\xBB\xBF")) {
    pos_.offset = 3;
  }
  while (!eof()) {
    if (peek() == '<') parse_markup();
    else parse_text();
  }
  if (!stack_.empty()) {
    problem(fmt::format("element <{}> is not closed at end of file", stack_.back().name),
            SourceSpan{path_, pos_.line, pos_.column, pos_.line, pos_.column, pos_.offset, pos_.offset});
    while (!stack_.empty()) close_top(pos_);
  }
  if (!doc_.root && doc_.problems.empty()) {
    doc_.problems.push_back(Problem{"document has no root element",
                                    SourceSpan{path_, 1, 1, 1, 1, 0, 0}});
  }
  return std::move(doc_);
}

}  // namespace

Document parse(std::string_view text, const std::string& path, const ParseOptions& options) {
  Parser parser(text, path, options);
  return parser.run();
}

std::string escape_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string escape_attribute(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      case '\n': out += "&#10;"; break;
      default: out += c;
    }
  }
  return out;
}

bool is_ncname(std::string_view s) {
  if (s.empty()) return false;
  auto first = static_cast<unsigned char>(s[0]);
  if (!is_name_start(first) || first == ':') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c != ':' && is_name_char(static_cast<unsigned char>(c));
  });
}

}  // namespace mtalk::xml
