#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <set>
#include <string>
#include <utility>

#include "chorc/analysis.hpp"
#include "chorc/semantics.hpp"
#include "chorc/syntax.hpp"
#include "testutil.hpp"

using namespace chorc;

namespace {

std::set<std::string> interaction_set(const std::vector<InteractionAt>& v) {
  std::set<std::string> out;
  for (const auto& [p, i] : v) out.insert(render_interaction(i));
  return out;
}

// ---------------------------------------------------------------------------
// Independent oracle: relations computed over explicit pair sets, straight
// from the definitions, no bit matrices.
// ---------------------------------------------------------------------------

using PairSet = std::set<std::pair<std::size_t, std::size_t>>;

struct NodeRanges {
  ChorKind kind;
  std::size_t begin, mid, end;  // leaf index ranges of the two children
};

std::vector<NodeRanges> collect_ranges(const ChorPtr& c) {
  std::vector<NodeRanges> out;
  std::size_t next = 0;
  std::function<void(const ChorPtr&)> go = [&](const ChorPtr& n) {
    switch (n->kind) {
      case ChorKind::Interaction:
        ++next;
        return;
      case ChorKind::One:
      case ChorKind::Zero:
        return;
      default: {
        std::size_t begin = next;
        go(n->left);
        std::size_t mid = next;
        go(n->right);
        out.push_back({n->kind, begin, mid, next});
      }
    }
  };
  go(c);
  return out;
}

PairSet oracle_causality(const ChorPtr& c) {
  EventSpace es = event_space(c);
  std::size_t n = es.size();
  PairSet leq;
  // sequentiality: a receive in the left of a ; relates to every later event
  // at the same role
  for (const NodeRanges& r : collect_ranges(c)) {
    if (r.kind != ChorKind::Seq) continue;
    for (std::size_t k = r.begin; k < r.mid; ++k) {
      std::size_t recv = 2 * k + 1;
      for (std::size_t l = r.mid; l < r.end; ++l)
        for (std::size_t e : {2 * l, 2 * l + 1})
          if (es.events[recv].role == es.events[e].role) leq.insert({recv, e});
    }
  }
  // close under transitivity and synchronization (receive pulls its send)
  for (bool changed = true; changed;) {
    changed = false;
    PairSet add;
    for (const auto& [x, y] : leq) {
      for (const auto& [y2, z] : leq)
        if (y == y2 && !leq.count({x, z})) add.insert({x, z});
      if (x % 2 == 1 && !leq.count({x - 1, y})) add.insert({x - 1, y});
    }
    if (!add.empty()) {
      changed = true;
      leq.insert(add.begin(), add.end());
    }
  }
  for (std::size_t i = 0; i < n; ++i) leq.insert({i, i});
  return leq;
}

PairSet oracle_conflict(const ChorPtr& c, const PairSet& leq) {
  EventSpace es = event_space(c);
  PairSet conf;
  // base: events of different branches of a choice at the same role
  for (const NodeRanges& r : collect_ranges(c)) {
    if (r.kind != ChorKind::Choice) continue;
    for (std::size_t k = r.begin; k < r.mid; ++k)
      for (std::size_t l = r.mid; l < r.end; ++l)
        for (std::size_t x : {2 * k, 2 * k + 1})
          for (std::size_t y : {2 * l, 2 * l + 1})
            if (es.events[x].role == es.events[y].role) {
              conf.insert({x, y});
              conf.insert({y, x});
            }
  }
  // close under (e'#e'' and e''<=e''' implies e'#e''') and symmetry
  for (bool changed = true; changed;) {
    changed = false;
    PairSet add;
    for (const auto& [x, y] : conf) {
      for (const auto& [y2, z] : leq)
        if (y == y2 && !conf.count({x, z})) add.insert({x, z});
      if (!conf.count({y, x})) add.insert({y, x});
    }
    if (!add.empty()) {
      changed = true;
      conf.insert(add.begin(), add.end());
    }
  }
  return conf;
}

PairSet relation_pairs(const EventRelation& r) {
  PairSet out;
  for (std::size_t i = 0; i < r.space.size(); ++i)
    for (std::size_t j = 0; j < r.space.size(); ++j)
      if (r.contains(i, j)) out.insert({i, j});
  return out;
}

}  // namespace

TEST_CASE("initial interactions") {
  CHECK(interaction_set(trans_i(parse("a->b:o ; c->d:p"))) ==
        std::set<std::string>{"a->b:o"});
  // a tickable left exposes the right's initials too
  CHECK(interaction_set(trans_i(parse("(a->b:o + 1) ; c->d:p"))) ==
        std::set<std::string>{"a->b:o", "c->d:p"});
  CHECK(interaction_set(trans_i(parse("a->b:o | c->d:p"))) ==
        std::set<std::string>{"a->b:o", "c->d:p"});
  CHECK(interaction_set(trans_i(parse("a->b:o + c->d:p"))) ==
        std::set<std::string>{"a->b:o", "c->d:p"});
  CHECK(trans_i(mk_one()).empty());
}

TEST_CASE("final interactions") {
  CHECK(interaction_set(trans_f(parse("a->b:o ; c->d:p"))) ==
        std::set<std::string>{"c->d:p"});
  CHECK(interaction_set(trans_f(parse("a->b:o ; (c->d:p + 1)"))) ==
        std::set<std::string>{"a->b:o", "c->d:p"});
  CHECK(interaction_set(trans_f(parse("a->b:o | c->d:p"))) ==
        std::set<std::string>{"a->b:o", "c->d:p"});
}

TEST_CASE("initial/final interactions agree with the transition system") {
  testutil::Gen gen(7);
  for (int i = 0; i < 300; ++i) {
    ChorPtr c = gen.choreography();

    std::set<std::string> lts_initial;
    for (const auto& [l, s] : step(c))
      if (!l.tick) lts_initial.insert(render_interaction(l.comm));
    CHECK(interaction_set(trans_i(c)) == lts_initial);

    std::set<std::string> lts_final;
    for (const Trace& t : strong_traces(c)) {
      for (auto it = t.rbegin(); it != t.rend(); ++it)
        if (!it->tick) {
          lts_final.insert(render_interaction(it->comm));
          break;
        }
    }
    CHECK(interaction_set(trans_f(c)) == lts_final);
  }
}

TEST_CASE("causality: sequentiality and synchronization") {
  // a->b:o ; b->c:p : the receive at b precedes b's later send, and the
  // synchronization rule pulls a's send along with it.
  ChorPtr c = parse("a->b:o ; b->c:p");
  EventRelation leq = causality(c);
  const auto& es = leq.space;
  std::size_t recv_b = EventSpace::receive_index(0);
  std::size_t send_b = EventSpace::send_index(1);
  std::size_t recv_c = EventSpace::receive_index(1);
  std::size_t send_a = EventSpace::send_index(0);
  CHECK(leq.contains(recv_b, send_b));
  CHECK(leq.contains(send_a, send_b));   // synchronization: send follows receive
  CHECK(leq.contains(send_a, send_a));   // reflexive
  CHECK_FALSE(leq.contains(send_a, recv_b));  // no send-to-own-receive edge
  CHECK_FALSE(leq.contains(recv_b, recv_c));  // receives are not pushed forward
  CHECK(es.events[recv_b].role == Role{"b"});
}

TEST_CASE("full conflict from choice, closed rightward along causality") {
  ChorPtr c = parse("a->b:o + a->c:p");
  EventRelation conf = full_conflict(c);
  std::size_t s1 = EventSpace::send_index(0), s2 = EventSpace::send_index(1);
  std::size_t r1 = EventSpace::receive_index(0), r2 = EventSpace::receive_index(1);
  CHECK(conf.contains(s1, s2));
  CHECK(conf.contains(s2, s1));
  CHECK_FALSE(conf.contains(r1, r2));  // b and c never share a role
}

TEST_CASE("relations match the set-based oracle on random terms") {
  testutil::Gen gen(99);
  for (int i = 0; i < 300; ++i) {
    ChorPtr c = gen.choreography();
    PairSet leq_oracle = oracle_causality(c);
    EventRelation leq = causality(c);
    CHECK(relation_pairs(leq) == leq_oracle);
    CHECK(relation_pairs(full_conflict(c, leq)) == oracle_conflict(c, leq_oracle));
  }
}

TEST_CASE("connectedness for sequence") {
  CHECK(check_sequence(parse("a->b:o ; b->c:p")).empty());
  auto vs = check_sequence(parse("a->b:o1 ; c->d:o2"));
  REQUIRE(vs.size() == 1);
  CHECK(vs[0].kind == ViolationKind::SeqNotConnected);
  CHECK(vs[0].subterm.empty());
  CHECK(vs[0].witnesses == std::vector<std::string>{"a->b:o1", "c->d:o2"});
  // one violation per violating node, however many witness pairs exist
  CHECK(check_sequence(parse("(a->b:o | a->c:p) ; (d->a:q + e->a:r)")).size() == 1);
}

TEST_CASE("unique points of choice") {
  CHECK(check_choice(parse("a->b:o + a->b:p")).empty());
  auto cond1 = check_choice(parse("a->b:o + b->a:p"));
  REQUIRE(cond1.size() >= 1);
  CHECK(cond1[0].kind == ViolationKind::ChoiceNotUniquePoint);
  CHECK(cond1[0].choice_cond == ChoiceCond::Cond1);
  auto cond2 = check_choice(parse("a->b:o ; b->c:p + a->b:o"));
  REQUIRE(cond2.size() == 1);
  CHECK(cond2[0].choice_cond == ChoiceCond::Cond2);
}

TEST_CASE("causality safety classes") {
  auto par = check_causality(parse("a->b:o | c->d:o"));
  REQUIRE(par.size() == 1);
  CHECK(par[0].causality_class == CausalityClass::ParallelIssue);

  // same operation twice in sequence between disjoint pairs, already
  // connected for sequence via relays
  auto seq = check_causality(
      parse("a->b:o ; b->e:x* ; e->c:y* ; c->d:o"));
  REQUIRE(seq.size() == 1);
  CHECK(seq[0].causality_class == CausalityClass::SequentialIssue);
  CHECK(seq[0].endangered_second);

  auto ch = check_causality(parse("a->b:o ; a->c:p + a->c:q ; a->b:o"));
  REQUIRE(ch.size() == 1);
  CHECK(ch[0].causality_class == CausalityClass::ChoiceIssue);

  CHECK(check_causality(parse("a->b:o ; b->a:p ; a->b:o")).empty());
}

TEST_CASE("check_all on the worked examples") {
  auto intro = check_all(parse("a->b:o1 ; c->d:o2"));
  REQUIRE(intro.size() == 1);
  CHECK(intro[0].kind == ViolationKind::SeqNotConnected);

  CHECK(check_all(parse("a->b:o1 ; b->e:f1* ; e->c:f2* ; c->d:o2")).empty());

  auto tb = check_all(parse(
      "b1->s:price ; (s->b1:quote1 | s->b2:quote2) ; b1->b2:contrib ; "
      "(b2->s:ok ; s->b2:delivery + 1)"));
  REQUIRE(tb.size() == 2);
  CHECK(tb[0].kind == ViolationKind::SeqNotConnected);
  CHECK(tb[1].kind == ViolationKind::ChoiceNotUniquePoint);
  CHECK(tb[1].choice_cond == ChoiceCond::Cond2);
}
