#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <vector>

#include "chorc/amend.hpp"
#include "chorc/analysis.hpp"
#include "chorc/equivalence.hpp"
#include "chorc/syntax.hpp"
#include "testutil.hpp"

using namespace chorc;
using testutil::alpha_equivalent_over;

namespace {

FreshSupply fresh_for(const ChorPtr& c, const std::string& prefix = "_") {
  return FreshSupply(c, prefix);
}

}  // namespace

TEST_CASE("fresh names avoid every reserved name and repeat deterministically") {
  ChorPtr c = parse("_e1->b:_f1* ; b->c:o");
  FreshSupply f1 = fresh_for(c);
  FreshSupply f2 = fresh_for(c);
  Role r = f1.fresh_role();
  CHECK(r.name != "_e1");
  CHECK(r == f2.fresh_role());
  Operation op = f1.fresh_op();
  CHECK(op.is_private());
  CHECK(op.name != "_f1");
  CHECK(op == f2.fresh_op());
}

TEST_CASE("connect_sequence on the intro example") {
  ChorPtr c = parse("a->b:o1 ; c->d:o2");
  FreshSupply fresh = fresh_for(c);
  ChorPtr d = connect_sequence(c, {}, fresh);
  CHECK(alpha_equivalent_over(d, parse("(a->b:o1 ; b->e:f1*) ; e->c:f2* ; c->d:o2"), c));
  CHECK(check_all(d).empty());
  CHECK(chor_equiv(c, d, EquivMode::Weak));
  CHECK_THROWS_AS(connect_sequence(d, {}, fresh), PreconditionError);
}

TEST_CASE("connect_choice_cond1 prefixes every branch-initial interaction") {
  ChorPtr c = parse("a->b:o + b->a:p");
  FreshSupply fresh = fresh_for(c);
  ChorPtr d = connect_choice_cond1(c, {}, fresh);
  CHECK(alpha_equivalent_over(
      d, parse("e->a:f1* ; a->b:o + e->b:f2* ; b->a:p"), c));
  CHECK(chor_equiv(c, d, EquivMode::Weak));
  CHECK_THROWS_AS(connect_choice_cond1(parse("a->b:o + a->c:p"), {}, fresh),
                  PreconditionError);
}

TEST_CASE("connect_choice_cond2 notifies roles missing from a branch") {
  ChorPtr c = parse("a->b:o ; b->c:p + a->b:o");
  FreshSupply fresh = fresh_for(c);
  ChorPtr d = connect_choice_cond2(c, {}, fresh);
  // the common initial sender a tells c in parallel with the short branch;
  // a itself never needs a notification
  CHECK(alpha_equivalent_over(
      d, parse("a->b:o ; b->c:p + (a->b:o | a->c:f1*)"), c));
  CHECK(chor_equiv(c, d, EquivMode::Weak));
  CHECK(check_choice(d).empty());
}

TEST_CASE("normal form: sums of interaction-prefixed continuations") {
  CHECK(is_normal_form(parse("a->b:o")));
  CHECK(is_normal_form(parse("a->b:o ; c->d:p + a->c:q")));
  CHECK_FALSE(is_normal_form(parse("a->b:o | c->d:p")));
  CHECK_FALSE(is_normal_form(parse("(a->b:o + a->c:q) ; c->d:p")));
  CHECK_FALSE(is_normal_form(mk_one()));

  ChorPtr c = parse("a->b:o | c->d:p");
  FreshSupply fresh = fresh_for(c);
  ChorPtr nf = normal_form(c, fresh, 20000);
  CHECK(is_normal_form(nf));
  CHECK(chor_equiv(c, nf, EquivMode::Weak));
  CHECK(alpha_equivalent_over(
      nf, parse("a->b:o ; c->d:p + c->d:p ; a->b:o"), c));
}

TEST_CASE("normal form of 1 is a fresh private interaction") {
  ChorPtr c = mk_one();
  FreshSupply fresh = fresh_for(c);
  ChorPtr nf = normal_form(c, fresh, 20000);
  CHECK(is_normal_form(nf));
  REQUIRE(nf->kind == ChorKind::Interaction);
  CHECK(nf->inter.op.is_private());
  CHECK(chor_equiv(c, nf, EquivMode::Weak));
}

TEST_CASE("normal form respects the expansion budget") {
  // six-way parallel composition over one operation blows up factorially
  ChorPtr c = parse("a->b:o | c->d:o | e->f:o | a->c:o | b->d:o | e->a:o");
  FreshSupply fresh = fresh_for(c);
  CHECK_THROWS_AS(normal_form(c, fresh, 200), CapExceeded);
}

TEST_CASE("expansion law preserves traces of a parallel composition") {
  testutil::Gen gen(5);
  for (int i = 0; i < 100; ++i) {
    ChorPtr l = gen.normal_form_term(2);
    ChorPtr r = gen.normal_form_term(2);
    ChorPtr e = expansion_law(l, r);
    CHECK(chor_equiv(mk_par(l, r), e, EquivMode::Strong));
  }
  CHECK_THROWS_AS(expansion_law(mk_par(parse("a->b:o"), parse("c->d:p")),
                                parse("a->b:o")),
                  PreconditionError);
}

TEST_CASE("sequential causality fix inserts a round trip") {
  ChorPtr c = parse("a->b:o ; b->e:x* ; e->c:y* ; c->d:o");
  auto vs = check_causality(c);
  REQUIRE(vs.size() == 1);
  FreshSupply fresh = fresh_for(c);
  ChorPtr d = fix_seq_causality(c, vs[0], fresh);
  CHECK(check_causality(d).empty());
  CHECK(chor_equiv(c, d, EquivMode::Weak));
  CHECK(alpha_equivalent_over(
      d, parse("(a->b:o ; b->d:f1* ; d->b:f2*) ; b->e:x* ; e->c:y* ; c->d:o"), c));
}

TEST_CASE("choice causality fix guards the endangered receives") {
  ChorPtr c = parse("a->b:o ; a->c:p + a->c:q ; a->b:o");
  auto vs = check_causality(c);
  REQUIRE(vs.size() == 1);
  REQUIRE(vs[0].causality_class == CausalityClass::ChoiceIssue);
  FreshSupply fresh = fresh_for(c);
  ChorPtr d = fix_choice_causality(c, vs[0], fresh);
  CHECK(check_causality(d).empty());
  CHECK(chor_equiv(c, d, EquivMode::Weak));
}

TEST_CASE("amend is the identity on connected choreographies") {
  for (const char* src : {
           "a->b:o",
           "a->b:o1 ; b->e:f1* ; e->c:f2* ; c->d:o2",
           "a->b:o + a->b:p",
       }) {
    ChorPtr c = parse(src);
    auto [d, report] = amend(c, {});
    CHECK(equal(c, d));
    CHECK(report.steps.empty());
  }
}

TEST_CASE("amend replays: applying the reported steps reproduces the output") {
  testutil::Gen gen(17);
  for (int i = 0; i < 60; ++i) {
    ChorPtr c = gen.choreography();
    auto [d, report] = amend(c, {});
    ChorPtr cur = c;
    for (const AmendStep& s : report.steps) {
      CHECK(render(subterm_at(cur, s.at)) == s.before);
      cur = replace_at(cur, s.at, parse(s.after, true));
    }
    CHECK(equal(cur, d));
    CHECK(equal(replay_steps(c, report), d));
  }
}

TEST_CASE("amend golden run: two same-operation parallel interactions") {
  ChorPtr c = parse("a->b:o | c->d:o");
  auto [d, report] = amend(c, {});

  std::vector<AmendPattern> expected = {
      AmendPattern::Normalize,           AmendPattern::ConnectSeq,
      AmendPattern::ConnectSeq,          AmendPattern::ConnectChoiceCond1,
      AmendPattern::ConnectChoiceCond2,  AmendPattern::FixSeqCausality,
      AmendPattern::FixSeqCausality,     AmendPattern::FixChoiceCausality,
      AmendPattern::FixChoiceCausality,  // one per guarded receive
  };
  REQUIRE(report.steps.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i)
    CHECK(report.steps[i].pattern == expected[i]);

  // the published intermediate stages, one per completed sub-procedure
  const char* stage1 = "a->b:o ; c->d:o + c->d:o ; a->b:o";
  const char* stage2 =
      "a->b:o ; b->ep:o1* ; ep->c:o2* ; c->d:o + "
      "c->d:o ; d->epp:o3* ; epp->a:o4* ; a->b:o";
  const char* stage3 =
      "e->a:o5* ; a->b:o ; b->ep:o1* ; ep->c:o2* ; c->d:o + "
      "e->c:o6* ; c->d:o ; d->epp:o3* ; epp->a:o4* ; a->b:o";
  const char* stage4 =
      "(e->a:o5* ; a->b:o ; b->ep:o1* ; ep->c:o2* ; c->d:o | e->epp:o7*) + "
      "(e->c:o6* ; c->d:o ; d->epp:o3* ; epp->a:o4* ; a->b:o | e->ep:o8*)";
  const char* stage5 =
      "(e->a:o5* ; a->b:o ; b->d:o9* ; d->b:o10* ; b->ep:o1* ; ep->c:o2* ; "
      "c->d:o | e->epp:o7*) + "
      "(e->c:o6* ; c->d:o ; d->b:o11* ; b->d:o12* ; d->epp:o3* ; epp->a:o4* ; "
      "a->b:o | e->ep:o8*)";
  const char* stage6 =
      "(e->a:o5* ; a->b:o13* ; b->a:o14* ; a->b:o ; b->d:o9* ; d->b:o10* ; "
      "b->ep:o1* ; ep->c:o2* ; c->d:o | e->epp:o7*) + "
      "(e->c:o6* ; c->d:o15* ; d->c:o16* ; c->d:o ; d->b:o11* ; b->d:o12* ; "
      "d->epp:o3* ; epp->a:o4* ; a->b:o | e->ep:o8*)";

  auto after_step = [&](std::size_t step_index) {
    ChorPtr cur = c;
    for (std::size_t i = 0; i <= step_index; ++i)
      cur = replace_at(cur, report.steps[i].at, parse(report.steps[i].after, true));
    return cur;
  };
  auto stage = [&](std::size_t step_index, const char* want) {
    CHECK(alpha_equivalent_over(after_step(step_index), parse(want), c));
  };
  stage(0, stage1);
  stage(2, stage2);
  stage(3, stage3);
  stage(4, stage4);
  stage(6, stage5);
  stage(8, stage6);

  CHECK(alpha_equivalent_over(d, parse(stage6), c));
  CHECK(check_all(d).empty());
  CHECK(chor_equiv(c, d, EquivMode::Weak));

  // sixteen fresh private operations and three fresh roles, as published
  std::set<std::string> fresh_roles, fresh_ops;
  for (const auto& [p, i] : leaves(d)) {
    for (const std::string& r : {i.sender.name, i.receiver.name})
      if (r.size() > 1) fresh_roles.insert(r);
    if (i.op.is_private()) fresh_ops.insert(i.op.name);
  }
  CHECK(fresh_roles.size() == 3);
  CHECK(fresh_ops.size() == 16);
}

TEST_CASE("amend golden run: two-buyers protocol") {
  ChorPtr c = parse(
      "b1->s:price ; (s->b1:quote1 | s->b2:quote2) ; b1->b2:contrib ; "
      "(b2->s:ok ; s->b2:delivery + 1)");
  auto [d, report] = amend(c, {});
  CHECK(check_all(d).empty());
  CHECK(chor_equiv(c, d, EquivMode::Weak));
  CHECK(alpha_equivalent_over(
      d,
      parse("b1->s:price ; "
            "(s->b1:quote1 ; b1->e1:o1* | s->b2:quote2 ; b2->e1:o2*) ; "
            "(e1->b1:o3* ; b1->b2:contrib) ; "
            "(b2->s:ok ; s->b2:delivery + (1 | b2->s:o4*))"),
      c));
}

TEST_CASE("amend converges and preserves weak traces on random terms") {
  testutil::Gen gen(123);
  for (int i = 0; i < 150; ++i) {
    ChorPtr c = gen.choreography();
    auto [d, report] = amend(c, {});
    CHECK(check_all(d).empty());
    CHECK(chor_equiv(c, d, EquivMode::Weak));
  }
}
