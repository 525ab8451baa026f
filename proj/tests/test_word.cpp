#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gbs/graph.hpp"
#include "gbs/word.hpp"
#include "testutil.hpp"

using namespace gbs;
using namespace gbs::test;

TEST_CASE("graph validation accepts BS(2,3) and rejects certified solvables") {
  auto g23 = bs_graph(2, 3);
  CHECK(validate_graph(g23).ok);

  CHECK_THROWS_AS(bs_graph(0, 3), input_error);

  auto bs15 = bs_graph(1, 5);
  auto d = validate_graph(bs15);
  CHECK_FALSE(d.ok);
  CHECK(d.rejection.find("BS(1,") != std::string::npos);

  auto z2 = bs_graph(1, 1);
  CHECK_FALSE(validate_graph(z2).ok);
  auto klein = bs_graph(1, -1);
  auto dk = validate_graph(klein);
  CHECK_FALSE(dk.ok);
  CHECK(dk.rejection.find("Klein") != std::string::npos);

  // segment amalgams
  std::vector<GraphOfGroups::Edge> seg{{"e", 1, 0, 1, 2}, {"E", 0, 1, 0, 2}};
  auto kl_amalgam = GraphOfGroups({"u", "w"}, seg);
  CHECK_FALSE(validate_graph(kl_amalgam).ok);
  std::vector<GraphOfGroups::Edge> seg2{{"e", 1, 0, 1, 2}, {"E", 0, 1, 0, 3}};
  auto ok_amalgam = GraphOfGroups({"u", "w"}, seg2);
  auto da = validate_graph(ok_amalgam);
  CHECK(da.ok);
  CHECK(da.reduced_edge_count == 1);

  // contracts to a point => Z
  std::vector<GraphOfGroups::Edge> seg3{{"e", 1, 0, 1, 1}, {"E", 0, 1, 0, 3}};
  CHECK_FALSE(validate_graph(GraphOfGroups({"u", "w"}, seg3)).ok);
}

TEST_CASE("broken involutions and endpoints are rejected") {
  std::vector<GraphOfGroups::Edge> bad{{"e", 0, 0, 0, 2}, {"E", 0, 0, 0, 3}};
  CHECK_THROWS_AS(GraphOfGroups({"v"}, bad), input_error);
}

TEST_CASE("reduce_word matches the Britton pinch rule in BS(2,3)") {
  auto g = bs_graph(2, 3);
  // t a^3 t^{-1}: pinch (3 | 3) to a^2
  Word w;
  push(w, 0, 0);
  push(w, 3, 1);
  Word r = reduce_word(g, w);
  CHECK(r.length() == 0);
  CHECK(r.head == 2);

  // empty word stays empty
  Word e = w_vertex(0, 0);
  CHECK(reduce_word(g, e) == e);

  // t a^2 t^{-1} is reduced (3 does not divide 2)
  Word u;
  push(u, 0, 0);
  push(u, 2, 1);
  CHECK(reduce_word(g, u) == u);
  CHECK(is_reduced(g, u));
}

TEST_CASE("reduction is idempotent and length is strategy-independent") {
  auto g = bs_graph(2, 3);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    Word w = random_loop(g, 0, rng, 8, 5);
    Word r = reduce_word(g, w);
    CHECK(reduce_word(g, r) == r);
    CHECK(is_reduced(g, r));
    Word o = oracle_reduce_random_order(g, w, rng);
    CHECK(o.length() == r.length());
  }
}

TEST_CASE("word problem: inverses, commutator, relation loop") {
  auto g = bs_graph(2, 3);
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    Word w = random_loop(g, 0, rng, 6, 4);
    CHECK(is_trivial(g, concat(g, w, inverse(g, w))));
  }
  // [t, a] = t a t^{-1} a^{-1} != 1
  Word c;
  push(c, 0, 0);
  push(c, 1, 1);
  push_exp(c, -1);
  CHECK_FALSE(is_trivial(g, c));
  CHECK_FALSE(oracle_is_trivial(g, c, rng));
  // t a^3 t^{-1} a^{-2} = 1
  Word r;
  push(r, 0, 0);
  push(r, 3, 1);
  push_exp(r, -2);
  CHECK(is_trivial(g, r));
}

TEST_CASE("normal forms are unique per element") {
  auto g = bs_graph(2, 3);
  std::mt19937_64 rng(13);
  for (int i = 0; i < 200; ++i) {
    Word w = random_loop(g, 0, rng, 5, 4);
    Word w2 = random_equivalent_word(g, w, rng, 4);
    CHECK(is_trivial(g, concat(g, w, inverse(g, w2))));
    CHECK(normal_form(g, w) == normal_form(g, w2));
  }
}

TEST_CASE("modulus is the label ratio and a homomorphism") {
  auto g23 = bs_graph(2, 3);
  CHECK(modulus(g23, w_vertex(0, 0)).is_one());
  Word t;
  push(t, 0, 0);
  CHECK(modulus(g23, t) == Rational(Int(2), Int(3)));

  auto g24 = bs_graph(2, 4);
  Word t2;
  push(t2, 0, 0);
  CHECK(modulus(g24, t2) == Rational(Int(1), Int(2)));

  std::mt19937_64 rng(17);
  for (int i = 0; i < 100; ++i) {
    Word u = random_loop(g23, 0, rng, 5, 3);
    Word v = random_loop(g23, 0, rng, 5, 3);
    CHECK(modulus(g23, concat(g23, u, v)) ==
          modulus(g23, u) * modulus(g23, v));
  }
}

TEST_CASE("subdivision: labels, rewriter, word problem preserved") {
  auto g = bs_graph(2, 3);
  Subdivision s = subdivide_edge(g, 0, 1);
  const GraphOfGroups& h = s.graph;
  CHECK(h.num_unoriented_edges() == 2);
  int e1 = s.new_edges_forward[0], e2 = s.new_edges_forward[1];
  CHECK(h.label(e1) == 2);
  CHECK(h.label(h.reverse(e1)) == 1);
  CHECK(h.label(e2) == 1);
  CHECK(h.label(h.reverse(e2)) == 3);

  Word triv = w_vertex(0, 0);
  Word rtriv = s.rewrite.apply(g, h, triv);
  CHECK(is_trivial(h, rtriv));

  std::mt19937_64 rng(19);
  for (int i = 0; i < 100; ++i) {
    Word w = random_loop(g, 0, rng, 6, 4);
    Word rw = s.rewrite.apply(g, h, w);
    CHECK(is_trivial(g, w) == is_trivial(h, rw));
    // and the rewriters invert each other on loops
    Word back = s.unrewrite.apply(h, g, rw);
    CHECK(is_trivial(g, concat(g, w, inverse(g, back))));
  }
}

TEST_CASE("word json round trip") {
  auto g = bs_graph(2, 3);
  std::mt19937_64 rng(23);
  for (int i = 0; i < 50; ++i) {
    Word w = random_loop(g, 0, rng, 4, 3);
    auto j = word_to_json(g, w);
    Word back = word_from_json(g, j, 0);
    CHECK(back == w);
  }
  // big exponents survive via strings
  Word big = w_vertex(0, 0);
  big.head = Int("123456789012345678901234567890");
  Word back = word_from_json(g, word_to_json(g, big), 0);
  CHECK(back == big);
}
