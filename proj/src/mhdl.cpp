#include "musa/mhdl.hpp"

#include <algorithm>
#include <cctype>
#include <queue>
#include <sstream>

namespace musa::mhdl {

bool is_logical(BinOp op) {
  switch (op) {
    case BinOp::And:
    case BinOp::Or:
    case BinOp::Nand:
    case BinOp::Nor:
    case BinOp::Xor:
    case BinOp::Xnor:
      return true;
    default:
      return false;
  }
}

std::string_view binop_name(BinOp op) {
  switch (op) {
    case BinOp::And: return "and";
    case BinOp::Or: return "or";
    case BinOp::Nand: return "nand";
    case BinOp::Nor: return "nor";
    case BinOp::Xor: return "xor";
    case BinOp::Xnor: return "xnor";
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Eq: return "=";
    case BinOp::Ne: return "/=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
  }
  return "?";
}

std::unique_ptr<Expr> Expr::clone() const {
  auto e = std::make_unique<Expr>();
  e->kind = kind;
  e->id = id;
  e->width = width;
  e->line = line;
  e->value = value;
  e->bit_literal = bit_literal;
  e->sized = sized;
  e->name = name;
  e->op = op;
  if (a) e->a = a->clone();
  if (b) e->b = b->clone();
  if (c) e->c = c->clone();
  return e;
}

bool Expr::structurally_equal(const Expr& other) const {
  if (kind != other.kind || width != other.width) return false;
  switch (kind) {
    case Kind::Literal:
      return value == other.value && bit_literal == other.bit_literal;
    case Kind::Ref:
      return name == other.name;
    case Kind::Not:
      return a->structurally_equal(*other.a);
    case Kind::Binary:
      return op == other.op && a->structurally_equal(*other.a) && b->structurally_equal(*other.b);
    case Kind::Select:
      return a->structurally_equal(*other.a) && b->structurally_equal(*other.b) &&
             c->structurally_equal(*other.c);
  }
  return false;
}

Design Design::clone() const {
  Design d;
  d.name = name;
  d.decls = decls;
  d.statements.reserve(statements.size());
  for (const Statement& s : statements) {
    Statement t;
    t.registered = s.registered;
    t.target = s.target;
    t.rhs = s.rhs->clone();
    t.reset_value = s.reset_value;
    t.line = s.line;
    d.statements.push_back(std::move(t));
  }
  d.decl_index = decl_index;
  d.comb_order = comb_order;
  d.total_input_bits = total_input_bits;
  d.total_output_bits = total_output_bits;
  return d;
}

const Decl& Design::decl(const std::string& n) const {
  auto it = decl_index.find(n);
  if (it == decl_index.end()) throw Error(Errc::UndeclaredName, "undeclared name: " + n);
  return decls[it->second];
}

bool Design::sequential() const {
  return std::any_of(statements.begin(), statements.end(),
                     [](const Statement& s) { return s.registered; });
}

bool Design::has_constants() const {
  return std::any_of(decls.begin(), decls.end(),
                     [](const Decl& d) { return d.kind == DeclKind::Const; });
}

bool Design::structurally_equal(const Design& other) const {
  if (name != other.name || decls.size() != other.decls.size() ||
      statements.size() != other.statements.size()) {
    return false;
  }
  for (std::size_t i = 0; i < decls.size(); ++i) {
    const Decl& x = decls[i];
    const Decl& y = other.decls[i];
    if (x.kind != y.kind || x.name != y.name || x.width != y.width || x.value != y.value) {
      return false;
    }
  }
  for (std::size_t i = 0; i < statements.size(); ++i) {
    const Statement& x = statements[i];
    const Statement& y = other.statements[i];
    if (x.registered != y.registered || x.target != y.target ||
        x.reset_value != y.reset_value || !x.rhs->structurally_equal(*y.rhs)) {
      return false;
    }
  }
  return true;
}

namespace {

uint64_t width_mask(uint32_t w) {
  return w >= 64 ? ~uint64_t{0} : (uint64_t{1} << w) - 1;
}

bool fits(uint64_t value, uint32_t w) { return value <= width_mask(w); }

// ---- tokens ----------------------------------------------------------------

struct Token {
  enum class Kind {
    Ident, Int, BitLit,
    Semi, Colon, LParen, RParen, Plus, Minus,
    Eq, Ne, Lt, Le, Gt, Ge,
    End,
  };
  Kind kind = Kind::End;
  std::string text;
  uint64_t ival = 0;
  int line = 1;
};

const char* const kKeywords[] = {"design", "in",  "out",  "sig",  "const", "reg",
                                 "when",   "else", "not",  "and",  "or",    "nand",
                                 "nor",    "xor",  "xnor", "reset"};

bool is_keyword(const std::string& s) {
  return std::find(std::begin(kKeywords), std::end(kKeywords), s) != std::end(kKeywords);
}

std::vector<Token> tokenize(const std::string& text) {
  std::vector<Token> out;
  int line = 1;
  std::size_t i = 0;
  auto push = [&](Token::Kind k, std::string t, uint64_t v = 0) {
    out.push_back(Token{k, std::move(t), v, line});
  };
  while (i < text.size()) {
    char ch = text[i];
    if (ch == '\n') {
      ++line;
      ++i;
      continue;
    }
    if (ch == ' ' || ch == '\t' || ch == '\r') {
      ++i;
      continue;
    }
    if (ch == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::size_t start = i;
      while (i < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) {
        ++i;
      }
      push(Token::Kind::Ident, text.substr(start, i - start));
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      std::size_t start = i;
      while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) ++i;
      std::string digits = text.substr(start, i - start);
      uint64_t v = 0;
      try {
        v = std::stoull(digits);
      } catch (const std::exception&) {
        throw Error(Errc::SyntaxError, "integer literal out of range: " + digits, line);
      }
      push(Token::Kind::Int, digits, v);
      continue;
    }
    if (ch == '\'') {
      if (i + 2 >= text.size() || (text[i + 1] != '0' && text[i + 1] != '1') ||
          text[i + 2] != '\'') {
        throw Error(Errc::SyntaxError, "bit literal must be '0' or '1'", line);
      }
      push(Token::Kind::BitLit, text.substr(i, 3), text[i + 1] - '0');
      i += 3;
      continue;
    }
    switch (ch) {
      case ';': push(Token::Kind::Semi, ";"); ++i; continue;
      case ':': push(Token::Kind::Colon, ":"); ++i; continue;
      case '(': push(Token::Kind::LParen, "("); ++i; continue;
      case ')': push(Token::Kind::RParen, ")"); ++i; continue;
      case '+': push(Token::Kind::Plus, "+"); ++i; continue;
      case '-': push(Token::Kind::Minus, "-"); ++i; continue;
      case '=': push(Token::Kind::Eq, "="); ++i; continue;
      case '/':
        if (i + 1 < text.size() && text[i + 1] == '=') {
          push(Token::Kind::Ne, "/=");
          i += 2;
          continue;
        }
        throw Error(Errc::SyntaxError, "stray `/` (did you mean `/=`?)", line);
      case '<':
        if (i + 1 < text.size() && text[i + 1] == '=') {
          push(Token::Kind::Le, "<=");
          i += 2;
          continue;
        }
        push(Token::Kind::Lt, "<");
        ++i;
        continue;
      case '>':
        if (i + 1 < text.size() && text[i + 1] == '=') {
          push(Token::Kind::Ge, ">=");
          i += 2;
          continue;
        }
        push(Token::Kind::Gt, ">");
        ++i;
        continue;
      default:
        throw Error(Errc::SyntaxError, std::string("unexpected character `") + ch + "`", line);
    }
  }
  Token end;
  end.kind = Token::Kind::End;
  end.line = line;
  out.push_back(end);
  return out;
}

// ---- parser ----------------------------------------------------------------

class Parser {
public:
  explicit Parser(const std::string& text) : toks_(tokenize(text)) {}

  Design parse() {
    Design d;
    expect_keyword("design");
    d.name = ident("design name");
    expect(Token::Kind::Semi, ";");
    while (at_keyword("in") || at_keyword("out") || at_keyword("sig") || at_keyword("const")) {
      d.decls.push_back(parse_decl());
    }
    while (peek().kind != Token::Kind::End) {
      d.statements.push_back(parse_statement());
    }
    return d;
  }

private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& advance() { return toks_[pos_++]; }

  bool at_keyword(std::string_view kw) const {
    return peek().kind == Token::Kind::Ident && peek().text == kw;
  }

  void expect_keyword(std::string_view kw) {
    if (!at_keyword(kw)) {
      throw Error(Errc::SyntaxError, "expected `" + std::string(kw) + "`", peek().line);
    }
    advance();
  }

  void expect(Token::Kind k, const char* what) {
    if (peek().kind != k) {
      throw Error(Errc::SyntaxError,
                  std::string("expected `") + what + "`, got `" + describe(peek()) + "`",
                  peek().line);
    }
    advance();
  }

  static std::string describe(const Token& t) {
    return t.kind == Token::Kind::End ? "end of input" : t.text;
  }

  std::string ident(const char* what) {
    if (peek().kind != Token::Kind::Ident || is_keyword(peek().text)) {
      throw Error(Errc::SyntaxError,
                  std::string("expected ") + what + ", got `" + describe(peek()) + "`",
                  peek().line);
    }
    return advance().text;
  }

  uint64_t integer(const char* what) {
    if (peek().kind != Token::Kind::Int) {
      throw Error(Errc::SyntaxError,
                  std::string("expected ") + what + ", got `" + describe(peek()) + "`",
                  peek().line);
    }
    return advance().ival;
  }

  Decl parse_decl() {
    Decl decl;
    decl.line = peek().line;
    std::string kw = advance().text;
    if (kw == "in") decl.kind = DeclKind::In;
    else if (kw == "out") decl.kind = DeclKind::Out;
    else if (kw == "sig") decl.kind = DeclKind::Sig;
    else decl.kind = DeclKind::Const;
    decl.name = ident("name");
    expect(Token::Kind::Colon, ":");
    decl.width = static_cast<uint32_t>(integer("width"));
    if (decl.kind == DeclKind::Const) {
      expect(Token::Kind::Eq, "=");
      decl.value = integer("constant value");
    }
    expect(Token::Kind::Semi, ";");
    return decl;
  }

  Statement parse_statement() {
    Statement s;
    s.line = peek().line;
    if (at_keyword("reg")) {
      advance();
      s.registered = true;
    } else if (at_keyword("in") || at_keyword("out") || at_keyword("sig") ||
               at_keyword("const")) {
      throw Error(Errc::SyntaxError,
                  "declarations must precede statements (got `" + peek().text + "`)",
                  peek().line);
    }
    s.target = ident("assignment target");
    expect(Token::Kind::Le, "<=");
    s.rhs = parse_expr();
    if (at_keyword("reset")) {
      int line = peek().line;
      advance();
      if (!s.registered) {
        throw Error(Errc::SyntaxError, "`reset` is only valid on reg statements", line);
      }
      s.reset_value = integer("reset value");
    }
    expect(Token::Kind::Semi, ";");
    return s;
  }

  std::unique_ptr<Expr> parse_expr() { return parse_when(); }

  std::unique_ptr<Expr> parse_when() {
    auto value = parse_logical();
    if (!at_keyword("when")) return value;
    int line = peek().line;
    advance();
    auto cond = parse_logical();
    expect_keyword("else");
    auto other = parse_when();
    auto e = std::make_unique<Expr>();
    e->kind = Expr::Kind::Select;
    e->line = line;
    e->a = std::move(value);
    e->c = std::move(cond);
    e->b = std::move(other);
    return e;
  }

  std::optional<BinOp> peek_logical() const {
    if (peek().kind != Token::Kind::Ident) return std::nullopt;
    const std::string& t = peek().text;
    if (t == "and") return BinOp::And;
    if (t == "or") return BinOp::Or;
    if (t == "nand") return BinOp::Nand;
    if (t == "nor") return BinOp::Nor;
    if (t == "xor") return BinOp::Xor;
    if (t == "xnor") return BinOp::Xnor;
    return std::nullopt;
  }

  std::unique_ptr<Expr> parse_logical() {
    auto e = parse_relational();
    while (auto op = peek_logical()) {
      int line = peek().line;
      advance();
      auto rhs = parse_relational();
      auto node = std::make_unique<Expr>();
      node->kind = Expr::Kind::Binary;
      node->op = *op;
      node->line = line;
      node->a = std::move(e);
      node->b = std::move(rhs);
      e = std::move(node);
    }
    return e;
  }

  std::optional<BinOp> peek_relational() const {
    switch (peek().kind) {
      case Token::Kind::Eq: return BinOp::Eq;
      case Token::Kind::Ne: return BinOp::Ne;
      case Token::Kind::Lt: return BinOp::Lt;
      case Token::Kind::Le: return BinOp::Le;
      case Token::Kind::Gt: return BinOp::Gt;
      case Token::Kind::Ge: return BinOp::Ge;
      default: return std::nullopt;
    }
  }

  std::unique_ptr<Expr> parse_relational() {
    auto e = parse_additive();
    if (auto op = peek_relational()) {
      int line = peek().line;
      advance();
      auto rhs = parse_additive();
      auto node = std::make_unique<Expr>();
      node->kind = Expr::Kind::Binary;
      node->op = *op;
      node->line = line;
      node->a = std::move(e);
      node->b = std::move(rhs);
      return node;  // non-associative: a second comparator fails at `;`
    }
    return e;
  }

  std::unique_ptr<Expr> parse_additive() {
    auto e = parse_unary();
    while (peek().kind == Token::Kind::Plus || peek().kind == Token::Kind::Minus) {
      BinOp op = peek().kind == Token::Kind::Plus ? BinOp::Add : BinOp::Sub;
      int line = peek().line;
      advance();
      auto rhs = parse_unary();
      auto node = std::make_unique<Expr>();
      node->kind = Expr::Kind::Binary;
      node->op = op;
      node->line = line;
      node->a = std::move(e);
      node->b = std::move(rhs);
      e = std::move(node);
    }
    return e;
  }

  std::unique_ptr<Expr> parse_unary() {
    if (at_keyword("not")) {
      int line = peek().line;
      advance();
      auto node = std::make_unique<Expr>();
      node->kind = Expr::Kind::Not;
      node->line = line;
      node->a = parse_unary();
      return node;
    }
    return parse_primary();
  }

  std::unique_ptr<Expr> parse_primary() {
    const Token& t = peek();
    if (t.kind == Token::Kind::LParen) {
      advance();
      auto e = parse_expr();
      expect(Token::Kind::RParen, ")");
      return e;
    }
    if (t.kind == Token::Kind::Int) {
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Literal;
      e->value = t.ival;
      e->line = t.line;
      advance();
      return e;
    }
    if (t.kind == Token::Kind::BitLit) {
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Literal;
      e->value = t.ival;
      e->bit_literal = true;
      e->sized = true;
      e->width = 1;
      e->line = t.line;
      advance();
      return e;
    }
    if (t.kind == Token::Kind::Ident && !is_keyword(t.text)) {
      auto e = std::make_unique<Expr>();
      e->kind = Expr::Kind::Ref;
      e->name = t.text;
      e->line = t.line;
      advance();
      return e;
    }
    throw Error(Errc::SyntaxError, "expected expression, got `" + describe(t) + "`", t.line);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---- width checking --------------------------------------------------------

std::optional<uint32_t> natural_width(const Design& d, const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Literal:
      return e.sized ? std::optional<uint32_t>(e.width) : std::nullopt;
    case Expr::Kind::Ref:
      return d.decl(e.name).width;
    case Expr::Kind::Not:
      return natural_width(d, *e.a);
    case Expr::Kind::Binary: {
      if (!is_logical(e.op) && e.op != BinOp::Add && e.op != BinOp::Sub) return 1;
      if (auto w = natural_width(d, *e.a)) return w;
      return natural_width(d, *e.b);
    }
    case Expr::Kind::Select: {
      if (auto w = natural_width(d, *e.a)) return w;
      return natural_width(d, *e.b);
    }
  }
  return std::nullopt;
}

uint32_t check_expr(const Design& d, Expr& e, uint32_t expected) {
  switch (e.kind) {
    case Expr::Kind::Literal: {
      if (e.sized) {
        if (expected != 0 && expected != e.width) {
          throw Error(Errc::WidthMismatch,
                      "literal has width " + std::to_string(e.width) + ", context expects " +
                          std::to_string(expected),
                      e.line);
        }
        return e.width;
      }
      if (expected == 0) {
        throw Error(Errc::WidthMismatch, "cannot infer width of literal " + std::to_string(e.value),
                    e.line);
      }
      if (!fits(e.value, expected)) {
        throw Error(Errc::WidthMismatch,
                    "literal " + std::to_string(e.value) + " does not fit in " +
                        std::to_string(expected) + " bits",
                    e.line);
      }
      e.width = expected;
      return expected;
    }
    case Expr::Kind::Ref: {
      uint32_t w = d.decl(e.name).width;
      if (expected != 0 && expected != w) {
        throw Error(Errc::WidthMismatch,
                    "`" + e.name + "` has width " + std::to_string(w) + ", context expects " +
                        std::to_string(expected),
                    e.line);
      }
      e.width = w;
      return w;
    }
    case Expr::Kind::Not: {
      uint32_t w = check_expr(d, *e.a, expected);
      e.width = w;
      return w;
    }
    case Expr::Kind::Binary: {
      if (is_logical(e.op) || e.op == BinOp::Add || e.op == BinOp::Sub) {
        uint32_t w = expected;
        if (w == 0) {
          auto n = natural_width(d, *e.a);
          if (!n) n = natural_width(d, *e.b);
          if (!n) {
            throw Error(Errc::WidthMismatch, "cannot infer operand width", e.line);
          }
          w = *n;
        }
        check_expr(d, *e.a, w);
        check_expr(d, *e.b, w);
        e.width = w;
        return w;
      }
      if (expected != 0 && expected != 1) {
        throw Error(Errc::WidthMismatch,
                    "comparison yields width 1, context expects " + std::to_string(expected),
                    e.line);
      }
      auto n = natural_width(d, *e.a);
      if (!n) n = natural_width(d, *e.b);
      if (!n) {
        throw Error(Errc::WidthMismatch, "cannot infer comparison operand width", e.line);
      }
      check_expr(d, *e.a, *n);
      check_expr(d, *e.b, *n);
      e.width = 1;
      return 1;
    }
    case Expr::Kind::Select: {
      check_expr(d, *e.c, 1);
      uint32_t w = expected;
      if (w == 0) {
        auto n = natural_width(d, *e.a);
        if (!n) n = natural_width(d, *e.b);
        if (!n) {
          throw Error(Errc::WidthMismatch, "cannot infer selection width", e.line);
        }
        w = *n;
      }
      check_expr(d, *e.a, w);
      check_expr(d, *e.b, w);
      e.width = w;
      return w;
    }
  }
  throw Error(Errc::Internal, "unreachable expression kind");
}

void walk(const Expr& e, const std::function<void(const Expr&)>& fn) {
  fn(e);
  switch (e.kind) {
    case Expr::Kind::Not:
      walk(*e.a, fn);
      break;
    case Expr::Kind::Binary:
      walk(*e.a, fn);
      walk(*e.b, fn);
      break;
    case Expr::Kind::Select:
      walk(*e.a, fn);
      walk(*e.c, fn);
      walk(*e.b, fn);
      break;
    default:
      break;
  }
}

void walk_mut(Expr& e, const std::function<void(Expr&)>& fn) {
  fn(e);
  switch (e.kind) {
    case Expr::Kind::Not:
      walk_mut(*e.a, fn);
      break;
    case Expr::Kind::Binary:
      walk_mut(*e.a, fn);
      walk_mut(*e.b, fn);
      break;
    case Expr::Kind::Select:
      walk_mut(*e.a, fn);
      walk_mut(*e.c, fn);
      walk_mut(*e.b, fn);
      break;
    default:
      break;
  }
}

}  // namespace

void validate(Design& d) {
  d.decl_index.clear();
  d.total_input_bits = 0;
  d.total_output_bits = 0;
  for (uint32_t i = 0; i < d.decls.size(); ++i) {
    Decl& decl = d.decls[i];
    if (d.decl_index.count(decl.name)) {
      throw Error(Errc::SyntaxError, "duplicate declaration of `" + decl.name + "`", decl.line);
    }
    if (decl.width < 1 || decl.width > 64) {
      throw Error(Errc::WidthMismatch, "width of `" + decl.name + "` must be between 1 and 64",
                  decl.line);
    }
    if (decl.kind == DeclKind::Const && !fits(decl.value, decl.width)) {
      throw Error(Errc::WidthMismatch,
                  "constant " + std::to_string(decl.value) + " does not fit in " +
                      std::to_string(decl.width) + " bits",
                  decl.line);
    }
    if (decl.kind == DeclKind::In) d.total_input_bits += decl.width;
    if (decl.kind == DeclKind::Out) d.total_output_bits += decl.width;
    d.decl_index.emplace(decl.name, i);
  }

  std::vector<int> driver(d.decls.size(), -1);
  for (uint32_t si = 0; si < d.statements.size(); ++si) {
    Statement& s = d.statements[si];
    auto it = d.decl_index.find(s.target);
    if (it == d.decl_index.end()) {
      throw Error(Errc::UndeclaredName, "assignment to undeclared name `" + s.target + "`",
                  s.line);
    }
    const Decl& target = d.decls[it->second];
    if (target.kind == DeclKind::In) {
      throw Error(Errc::InvalidStatement, "input port `" + s.target + "` cannot be assigned",
                  s.line);
    }
    if (target.kind == DeclKind::Const) {
      throw Error(Errc::InvalidStatement, "constant `" + s.target + "` cannot be assigned",
                  s.line);
    }
    if (driver[it->second] >= 0) {
      throw Error(Errc::MultipleDrivers, "`" + s.target + "` is assigned more than once", s.line);
    }
    driver[it->second] = static_cast<int>(si);
    if (s.registered && !fits(s.reset_value, target.width)) {
      throw Error(Errc::WidthMismatch,
                  "reset value " + std::to_string(s.reset_value) + " does not fit in " +
                      std::to_string(target.width) + " bits",
                  s.line);
    }
  }

  for (const Statement& s : d.statements) {
    walk(*s.rhs, [&](const Expr& e) {
      if (e.kind == Expr::Kind::Ref && !d.has_decl(e.name)) {
        throw Error(Errc::UndeclaredName, "undeclared name `" + e.name + "`", e.line);
      }
    });
  }

  for (Statement& s : d.statements) {
    check_expr(d, *s.rhs, d.decl(s.target).width);
  }

  for (uint32_t i = 0; i < d.decls.size(); ++i) {
    const Decl& decl = d.decls[i];
    if ((decl.kind == DeclKind::Out || decl.kind == DeclKind::Sig) && driver[i] < 0) {
      throw Error(Errc::UndrivenSignal, "`" + decl.name + "` is never assigned", decl.line);
    }
  }

  // Dependency order over combinational statements; registered targets are
  // state and do not create edges.
  std::vector<uint32_t> comb;
  for (uint32_t si = 0; si < d.statements.size(); ++si) {
    if (!d.statements[si].registered) comb.push_back(si);
  }
  std::vector<uint32_t> pending(d.statements.size(), 0);
  std::vector<std::vector<uint32_t>> consumers(d.statements.size());
  for (uint32_t si : comb) {
    walk(*d.statements[si].rhs, [&](const Expr& e) {
      if (e.kind != Expr::Kind::Ref) return;
      uint32_t di = d.decl_index.at(e.name);
      int src = driver[di];
      if (src >= 0 && !d.statements[src].registered) {
        consumers[src].push_back(si);
        ++pending[si];
      }
    });
  }
  std::priority_queue<uint32_t, std::vector<uint32_t>, std::greater<>> ready;
  for (uint32_t si : comb) {
    if (pending[si] == 0) ready.push(si);
  }
  d.comb_order.clear();
  while (!ready.empty()) {
    uint32_t si = ready.top();
    ready.pop();
    d.comb_order.push_back(si);
    for (uint32_t c : consumers[si]) {
      if (--pending[c] == 0) ready.push(c);
    }
  }
  if (d.comb_order.size() != comb.size()) {
    for (uint32_t si : comb) {
      if (pending[si] != 0) {
        throw Error(Errc::CombinationalCycle,
                    "combinational cycle through `" + d.statements[si].target + "`",
                    d.statements[si].line);
      }
    }
  }

  uint32_t next_id = 0;
  for (Statement& s : d.statements) {
    walk_mut(*s.rhs, [&next_id](Expr& e) { e.id = next_id++; });
  }
}

Design parse_mhdl(const std::string& text) {
  Parser p(text);
  Design d = p.parse();
  validate(d);
  return d;
}

namespace {

std::string print_expr(const Expr& e);

std::string print_atom(const Expr& e) {
  if (e.kind == Expr::Kind::Literal || e.kind == Expr::Kind::Ref) return print_expr(e);
  return "(" + print_expr(e) + ")";
}

std::string print_expr(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Literal:
      if (e.bit_literal) return e.value ? "'1'" : "'0'";
      return std::to_string(e.value);
    case Expr::Kind::Ref:
      return e.name;
    case Expr::Kind::Not:
      return "not " + print_atom(*e.a);
    case Expr::Kind::Binary:
      return print_atom(*e.a) + " " + std::string(binop_name(e.op)) + " " + print_atom(*e.b);
    case Expr::Kind::Select: {
      std::string tail =
          e.b->kind == Expr::Kind::Select ? print_expr(*e.b) : print_atom(*e.b);
      return print_atom(*e.a) + " when " + print_atom(*e.c) + " else " + tail;
    }
  }
  return {};
}

}  // namespace

std::string print_mhdl(const Design& d) {
  std::ostringstream out;
  out << "design " << d.name << ";\n";
  for (const Decl& decl : d.decls) {
    switch (decl.kind) {
      case DeclKind::In: out << "in "; break;
      case DeclKind::Out: out << "out "; break;
      case DeclKind::Sig: out << "sig "; break;
      case DeclKind::Const: out << "const "; break;
    }
    out << decl.name << ":" << decl.width;
    if (decl.kind == DeclKind::Const) out << " = " << decl.value;
    out << ";\n";
  }
  for (const Statement& s : d.statements) {
    if (s.registered) out << "reg ";
    out << s.target << " <= " << print_expr(*s.rhs);
    if (s.registered && s.reset_value != 0) out << " reset " << s.reset_value;
    out << ";\n";
  }
  return out.str();
}

uint64_t content_hash(const Design& d) { return fnv1a64(print_mhdl(d)); }

void for_each_node(const Design& d, const std::function<void(const Expr&)>& fn) {
  for (const Statement& s : d.statements) walk(*s.rhs, fn);
}

Expr* find_node(Design& d, uint32_t id) {
  Expr* found = nullptr;
  for (Statement& s : d.statements) {
    walk_mut(*s.rhs, [&](Expr& e) {
      if (e.id == id) found = &e;
    });
  }
  return found;
}

// ---- evaluation ------------------------------------------------------------

namespace {

uint64_t eval_expr(const Design& d, const Expr& e, const std::vector<uint64_t>& values) {
  switch (e.kind) {
    case Expr::Kind::Literal:
      return e.value;
    case Expr::Kind::Ref:
      return values[d.decl_index.at(e.name)];
    case Expr::Kind::Not:
      return width_mask(e.width) & ~eval_expr(d, *e.a, values);
    case Expr::Kind::Binary: {
      uint64_t va = eval_expr(d, *e.a, values);
      uint64_t vb = eval_expr(d, *e.b, values);
      uint64_t m = width_mask(e.a->width);
      switch (e.op) {
        case BinOp::And: return va & vb;
        case BinOp::Or: return va | vb;
        case BinOp::Nand: return m & ~(va & vb);
        case BinOp::Nor: return m & ~(va | vb);
        case BinOp::Xor: return va ^ vb;
        case BinOp::Xnor: return m & ~(va ^ vb);
        case BinOp::Add: return (va + vb) & m;
        case BinOp::Sub: return (va - vb) & m;
        case BinOp::Eq: return va == vb;
        case BinOp::Ne: return va != vb;
        case BinOp::Lt: return va < vb;
        case BinOp::Le: return va <= vb;
        case BinOp::Gt: return va > vb;
        case BinOp::Ge: return va >= vb;
      }
      return 0;
    }
    case Expr::Kind::Select:
      return eval_expr(d, *e.c, values) ? eval_expr(d, *e.a, values)
                                        : eval_expr(d, *e.b, values);
  }
  return 0;
}

}  // namespace

Evaluator::Evaluator(const Design& d) : d_(d) { reset(); }

void Evaluator::reset() {
  values_.assign(d_.decls.size(), 0);
  state_.assign(d_.statements.size(), 0);
  for (std::size_t si = 0; si < d_.statements.size(); ++si) {
    if (d_.statements[si].registered) state_[si] = d_.statements[si].reset_value;
  }
}

BitVec Evaluator::step(const BitVec& input) {
  if (input.size() != d_.total_input_bits) {
    throw Error(Errc::WidthMismatch, "input vector has " + std::to_string(input.size()) +
                                         " bits, design has " +
                                         std::to_string(d_.total_input_bits));
  }
  for (std::size_t di = 0; di < d_.decls.size(); ++di) {
    if (d_.decls[di].kind == DeclKind::Const) values_[di] = d_.decls[di].value;
  }
  std::size_t pos = 0;
  for (std::size_t di = 0; di < d_.decls.size(); ++di) {
    const Decl& decl = d_.decls[di];
    if (decl.kind != DeclKind::In) continue;
    uint64_t v = 0;
    for (uint32_t k = 0; k < decl.width; ++k) v = (v << 1) | (input[pos++] & 1u);
    values_[di] = v;
  }
  for (std::size_t si = 0; si < d_.statements.size(); ++si) {
    const Statement& s = d_.statements[si];
    if (s.registered) values_[d_.decl_index.at(s.target)] = state_[si];
  }
  for (uint32_t si : d_.comb_order) {
    const Statement& s = d_.statements[si];
    values_[d_.decl_index.at(s.target)] = eval_expr(d_, *s.rhs, values_);
  }
  BitVec out(d_.total_output_bits);
  pos = 0;
  for (std::size_t di = 0; di < d_.decls.size(); ++di) {
    const Decl& decl = d_.decls[di];
    if (decl.kind != DeclKind::Out) continue;
    uint64_t v = values_[di];
    for (uint32_t k = 0; k < decl.width; ++k) {
      out[pos++] = static_cast<uint8_t>((v >> (decl.width - 1 - k)) & 1u);
    }
  }
  std::vector<uint64_t> next = state_;
  for (std::size_t si = 0; si < d_.statements.size(); ++si) {
    const Statement& s = d_.statements[si];
    if (s.registered) next[si] = eval_expr(d_, *s.rhs, values_);
  }
  state_ = std::move(next);
  return out;
}

std::vector<BitVec> evaluate(const Design& d, const testgen::VectorSequence& seq) {
  if (seq.width != d.total_input_bits) {
    throw Error(Errc::WidthMismatch, "sequence width " + std::to_string(seq.width) +
                                         " does not match " +
                                         std::to_string(d.total_input_bits) + " input bits");
  }
  Evaluator ev(d);
  std::vector<BitVec> out;
  out.reserve(seq.size());
  for (const BitVec& v : seq.vectors) out.push_back(ev.step(v));
  return out;
}

}  // namespace musa::mhdl
