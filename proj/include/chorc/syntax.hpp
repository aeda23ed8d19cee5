#pragma once

#include <cctype>
#include <compare>
#include <memory>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "chorc/errors.hpp"

namespace chorc {

// ---------------------------------------------------------------------------
// Roles, operations, interactions
// ---------------------------------------------------------------------------

struct Role {
  std::string name;

  friend auto operator<=>(const Role&, const Role&) = default;
};

enum class Visibility { Public, Private };

struct Operation {
  std::string name;
  Visibility visibility = Visibility::Public;

  bool is_private() const { return visibility == Visibility::Private; }

  friend auto operator<=>(const Operation&, const Operation&) = default;
};

// A single communication: `sender` sends a message on `op` to `receiver`.
struct Interaction {
  Role sender;
  Role receiver;
  Operation op;

  friend auto operator<=>(const Interaction&, const Interaction&) = default;
};

// ---------------------------------------------------------------------------
// Choreography terms
// ---------------------------------------------------------------------------

enum class ChorKind { Interaction, One, Zero, Seq, Par, Choice };

struct Chor;
using ChorPtr = std::shared_ptr<const Chor>;

// Immutable choreography term. Zero is a runtime-only state (the LTS target
// of the End rule); the parser rejects it in user syntax.
struct Chor {
  ChorKind kind;
  Interaction inter;  // valid iff kind == Interaction
  ChorPtr left;       // valid for Seq/Par/Choice
  ChorPtr right;
};

inline ChorPtr mk_interaction(Interaction i) {
  return std::make_shared<Chor>(Chor{ChorKind::Interaction, std::move(i), nullptr, nullptr});
}
inline ChorPtr mk_interaction(const std::string& a, const std::string& b,
                              const std::string& op,
                              Visibility vis = Visibility::Public) {
  return mk_interaction(Interaction{Role{a}, Role{b}, Operation{op, vis}});
}
inline ChorPtr mk_one() {
  static const ChorPtr one = std::make_shared<Chor>(Chor{ChorKind::One, {}, nullptr, nullptr});
  return one;
}
inline ChorPtr mk_zero() {
  static const ChorPtr zero = std::make_shared<Chor>(Chor{ChorKind::Zero, {}, nullptr, nullptr});
  return zero;
}
inline ChorPtr mk_seq(ChorPtr l, ChorPtr r) {
  return std::make_shared<Chor>(Chor{ChorKind::Seq, {}, std::move(l), std::move(r)});
}
inline ChorPtr mk_par(ChorPtr l, ChorPtr r) {
  return std::make_shared<Chor>(Chor{ChorKind::Par, {}, std::move(l), std::move(r)});
}
inline ChorPtr mk_choice(ChorPtr l, ChorPtr r) {
  return std::make_shared<Chor>(Chor{ChorKind::Choice, {}, std::move(l), std::move(r)});
}

inline int compare(const ChorPtr& a, const ChorPtr& b) {
  if (a.get() == b.get()) return 0;
  if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
  switch (a->kind) {
    case ChorKind::Interaction: {
      if (a->inter != b->inter) return a->inter < b->inter ? -1 : 1;
      return 0;
    }
    case ChorKind::One:
    case ChorKind::Zero:
      return 0;
    default: {
      int c = compare(a->left, b->left);
      if (c != 0) return c;
      return compare(a->right, b->right);
    }
  }
}

inline bool equal(const ChorPtr& a, const ChorPtr& b) { return compare(a, b) == 0; }

// Ordering for use in std::set/std::map keys.
struct ChorLess {
  bool operator()(const ChorPtr& a, const ChorPtr& b) const { return compare(a, b) < 0; }
};

// ---------------------------------------------------------------------------
// Paths
// ---------------------------------------------------------------------------

enum class Step : unsigned char { Left = 0, Right = 1 };

// Address of a subterm: a sequence of Left/Right moves from the root.
using Path = std::vector<Step>;

inline ChorPtr subterm_at(const ChorPtr& c, const Path& p) {
  ChorPtr cur = c;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!cur->left)
      throw InvalidPath("path step " + std::to_string(i) + " descends into a leaf");
    cur = (p[i] == Step::Left) ? cur->left : cur->right;
  }
  return cur;
}

// Rebuilds the spine above `p`, substituting `replacement` at `p`.
inline ChorPtr replace_at(const ChorPtr& c, const Path& p, const ChorPtr& replacement,
                          std::size_t from = 0) {
  if (from == p.size()) return replacement;
  if (!c->left) throw InvalidPath("path descends into a leaf");
  if (p[from] == Step::Left) {
    auto l = replace_at(c->left, p, replacement, from + 1);
    return std::make_shared<Chor>(Chor{c->kind, c->inter, std::move(l), c->right});
  }
  auto r = replace_at(c->right, p, replacement, from + 1);
  return std::make_shared<Chor>(Chor{c->kind, c->inter, c->left, std::move(r)});
}

// All interaction leaves in left-to-right order, with their addresses.
inline void collect_leaves(const ChorPtr& c, Path& prefix,
                           std::vector<std::pair<Path, Interaction>>& out) {
  switch (c->kind) {
    case ChorKind::Interaction:
      out.emplace_back(prefix, c->inter);
      break;
    case ChorKind::One:
    case ChorKind::Zero:
      break;
    default:
      prefix.push_back(Step::Left);
      collect_leaves(c->left, prefix, out);
      prefix.back() = Step::Right;
      collect_leaves(c->right, prefix, out);
      prefix.pop_back();
  }
}

inline std::vector<std::pair<Path, Interaction>> leaves(const ChorPtr& c) {
  std::vector<std::pair<Path, Interaction>> out;
  Path prefix;
  collect_leaves(c, prefix, out);
  return out;
}

inline std::set<Role> roles(const ChorPtr& c) {
  std::set<Role> out;
  for (const auto& [p, i] : leaves(c)) {
    out.insert(i.sender);
    out.insert(i.receiver);
  }
  return out;
}

inline std::size_t node_count(const ChorPtr& c) {
  if (!c->left) return 1;
  return 1 + node_count(c->left) + node_count(c->right);
}

// ---------------------------------------------------------------------------
// Rendering
//
// Precedence (loosest to tightest): + , | , ; . All binary operators are
// right-associative, so a left-nested child at the same level needs parens.
// ---------------------------------------------------------------------------

inline std::string render_op(const Operation& op) {
  return op.is_private() ? op.name + "*" : op.name;
}

inline std::string render_interaction(const Interaction& i) {
  return i.sender.name + "->" + i.receiver.name + ":" + render_op(i.op);
}

namespace detail {

inline int precedence(ChorKind k) {
  switch (k) {
    case ChorKind::Choice: return 0;
    case ChorKind::Par: return 1;
    case ChorKind::Seq: return 2;
    default: return 3;
  }
}

inline void render_rec(const ChorPtr& c, int parent_prec, bool left_child,
                       std::string& out) {
  switch (c->kind) {
    case ChorKind::Interaction:
      out += render_interaction(c->inter);
      return;
    case ChorKind::One:
      out += "1";
      return;
    case ChorKind::Zero:
      out += "0";
      return;
    default: {
      int prec = precedence(c->kind);
      bool parens = prec < parent_prec || (prec == parent_prec && left_child);
      if (parens) out += "(";
      const char* sep = c->kind == ChorKind::Seq ? " ; "
                        : c->kind == ChorKind::Par ? " | "
                                                   : " + ";
      render_rec(c->left, prec, true, out);
      out += sep;
      render_rec(c->right, prec, false, out);
      if (parens) out += ")";
      return;
    }
  }
}

}  // namespace detail

inline std::string render(const ChorPtr& c) {
  std::string out;
  detail::render_rec(c, 0, false, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing
//
//   chor   := choice ;
//   choice := par ( "+" par )* ;
//   par    := seq ( "|" seq )* ;
//   seq    := atom ( ";" atom )* ;
//   atom   := interaction | "1" | "(" chor ")" ;
//   interaction := IDENT "->" IDENT ":" IDENT "*"? ;
//
// Whitespace insensitive; `#` starts a line comment. `0` is accepted only
// when `allow_zero` is set (runtime terms in tests).
// ---------------------------------------------------------------------------

namespace detail {

class Parser {
 public:
  Parser(std::string_view text, bool allow_zero)
      : text_(text), allow_zero_(allow_zero) {}

  ChorPtr parse() {
    ChorPtr c = parse_choice();
    skip_ws();
    if (pos_ < text_.size()) fail("unexpected trailing input");
    return c;
  }

 private:
  std::string_view text_;
  bool allow_zero_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, line_, col_); }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < text_.size()) {
      char ch = text_[pos_];
      if (ch == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        advance();
      } else {
        break;
      }
    }
  }

  bool eat(char ch) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == ch) {
      advance();
      return true;
    }
    return false;
  }

  bool eat(std::string_view tok) {
    skip_ws();
    if (text_.substr(pos_, tok.size()) == tok) {
      for (std::size_t i = 0; i < tok.size(); ++i) advance();
      return true;
    }
    return false;
  }

  std::string ident() {
    skip_ws();
    if (pos_ >= text_.size() || !(std::isalpha(static_cast<unsigned char>(text_[pos_])) ||
                                  text_[pos_] == '_'))
      fail("expected identifier");
    std::string out;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
      out += text_[pos_];
      advance();
    }
    return out;
  }

  ChorPtr parse_choice() {
    ChorPtr l = parse_par();
    if (eat('+')) return mk_choice(std::move(l), parse_choice());
    return l;
  }

  ChorPtr parse_par() {
    ChorPtr l = parse_seq();
    if (eat('|')) return mk_par(std::move(l), parse_par());
    return l;
  }

  ChorPtr parse_seq() {
    ChorPtr l = parse_atom();
    if (eat(';')) return mk_seq(std::move(l), parse_seq());
    return l;
  }

  ChorPtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    if (eat('(')) {
      ChorPtr c = parse_choice();
      if (!eat(')')) fail("expected ')'");
      return c;
    }
    if (text_[pos_] == '1') {
      advance();
      return mk_one();
    }
    if (text_[pos_] == '0') {
      if (!allow_zero_) fail("'0' is a runtime-only term, not user syntax");
      advance();
      return mk_zero();
    }
    int l = line_, c = col_;
    std::string sender = ident();
    if (!eat("->")) fail("expected '->'");
    std::string receiver = ident();
    if (!eat(':')) fail("expected ':'");
    std::string op = ident();
    Visibility vis = Visibility::Public;
    if (pos_ < text_.size() && text_[pos_] == '*') {
      advance();
      vis = Visibility::Private;
    }
    if (sender == receiver)
      throw ParseError("interaction sender equals receiver ('" + sender + "')", l, c);
    return mk_interaction(sender, receiver, op, vis);
  }
};

}  // namespace detail

inline ChorPtr parse(std::string_view text, bool allow_zero = false) {
  return detail::Parser(text, allow_zero).parse();
}

}  // namespace chorc
