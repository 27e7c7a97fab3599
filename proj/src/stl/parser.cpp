#include "stlswarm/stl/parser.hpp"

#include <cctype>

namespace stlswarm::stl {

namespace {

class Parser {
 public:
  Parser(const std::string& text, const RegionTable& regions)
      : text_(text), regions_(regions) {}

  FormulaPtr run() {
    FormulaPtr f = implication();
    skip_ws();
    if (pos_ < text_.size()) fail("unexpected trailing input");
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(line_, col_, what);
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      advance();
    }
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      advance();
      return true;
    }
    return false;
  }

  void expect(char c, const char* context) {
    if (!eat(c)) {
      fail(std::string("expected '") + c + "' " + context);
    }
  }

  bool eat_arrow() {
    skip_ws();
    if (pos_ + 1 < text_.size() && text_[pos_] == '-' && text_[pos_ + 1] == '>') {
      advance();
      advance();
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < text_.size() ? text_[pos_] : '\0';
  }

  int integer() {
    skip_ws();
    if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      fail("expected a nonnegative integer");
    }
    long v = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      v = v * 10 + (text_[pos_] - '0');
      if (v > 1'000'000'000L) fail("integer bound too large");
      advance();
    }
    return static_cast<int>(v);
  }

  std::string ident() {
    skip_ws();
    if (pos_ >= text_.size() ||
        !(std::isalpha(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      fail("expected an identifier");
    }
    std::string s;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      s += text_[pos_];
      advance();
    }
    return s;
  }

  std::pair<int, int> window(const char* op) {
    expect('[', op);
    const int line = line_, col = col_;
    const int a = integer();
    expect(',', op);
    const int b = integer();
    expect(']', op);
    if (a > b) throw ParseError(line, col, "temporal bound a>b");
    return {a, b};
  }

  FormulaPtr implication() {
    FormulaPtr lhs = disjunction();
    if (eat_arrow()) {
      return make_implies(std::move(lhs), implication());
    }
    return lhs;
  }

  FormulaPtr disjunction() {
    std::vector<FormulaPtr> parts{conjunction()};
    while (eat('|')) parts.push_back(conjunction());
    if (parts.size() == 1) return parts[0];
    return make_or(std::move(parts));
  }

  FormulaPtr conjunction() {
    std::vector<FormulaPtr> parts{term()};
    while (eat('&')) parts.push_back(term());
    if (parts.size() == 1) return parts[0];
    return make_and(std::move(parts));
  }

  FormulaPtr term() {
    if (eat('!')) return make_not(atom());
    return atom();
  }

  FormulaPtr atom() {
    FormulaPtr f = primary();
    // 'U' is an infix only between primaries; chains associate left.
    while (true) {
      skip_ws();
      if (pos_ < text_.size() && text_[pos_] == 'U' && is_window_next(pos_ + 1)) {
        advance();
        auto [a, b] = window("after 'U'");
        f = make_until(a, b, std::move(f), primary());
      } else {
        break;
      }
    }
    return f;
  }

  // Distinguishes the operators F/G/U from identifiers starting with those
  // letters: an operator is followed (modulo whitespace) by '['.
  bool is_window_next(std::size_t from) const {
    while (from < text_.size() && std::isspace(static_cast<unsigned char>(text_[from]))) {
      ++from;
    }
    return from < text_.size() && text_[from] == '[';
  }

  FormulaPtr primary() {
    const char c = peek();
    if (c == '(') {
      eat('(');
      FormulaPtr f = implication();
      expect(')', "to close group");
      return f;
    }
    if ((c == 'F' || c == 'G') && is_window_next(pos_ + 1)) {
      advance();
      auto [a, b] = window(c == 'F' ? "after 'F'" : "after 'G'");
      expect('(', "after temporal window");
      FormulaPtr f = implication();
      expect(')', "to close temporal operand");
      return c == 'F' ? make_eventually(a, b, std::move(f))
                      : make_globally(a, b, std::move(f));
    }
    const int line = line_, col = col_;
    const std::string name = ident();
    auto it = regions_.find(name);
    if (it == regions_.end()) {
      throw ParseError(line, col, "unknown region '" + name + "'");
    }
    return make_predicate(it->second);
  }

  const std::string& text_;
  const RegionTable& regions_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
};

}  // namespace

FormulaPtr parse_spec(const std::string& text, const RegionTable& regions) {
  return Parser(text, regions).run();
}

}  // namespace stlswarm::stl
