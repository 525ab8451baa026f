#ifndef GBS_TESTUTIL_HPP
#define GBS_TESTUTIL_HPP

#include <random>
#include <vector>

#include "gbs/cover.hpp"
#include "gbs/graph.hpp"
#include "gbs/word.hpp"

namespace gbs::test {

// One vertex "v", loop edge "e"/"E" with labels (p, q):
// BS(p,q) = < a, t | t a^q t^{-1} = a^p > under the inclusion convention.
inline GraphOfGroups bs_graph(long long p, long long q) {
  std::vector<GraphOfGroups::Edge> edges;
  edges.push_back({"e", 1, 0, 0, p});
  edges.push_back({"E", 0, 0, 0, q});
  return GraphOfGroups({"v"}, edges);
}

inline Word w_vertex(int v, long long k) {
  Word w;
  w.start = v;
  w.head = k;
  return w;
}

// Append a^k t_e to a word under construction.
inline Word& push(Word& w, long long k, int e) {
  if (w.syls.empty())
    w.head += k;
  else
    w.syls.back().exp += k;
  w.syls.push_back({e, Int(0)});
  return w;
}

inline Word& push_exp(Word& w, long long k) {
  if (w.syls.empty())
    w.head += k;
  else
    w.syls.back().exp += k;
  return w;
}

// Random loop at `base` with <= max_len edge letters and |exponents| <=
// max_exp, by a retrying random walk.
inline Word random_loop(const GraphOfGroups& g, int base, std::mt19937_64& rng,
                        int max_len, int max_exp) {
  std::uniform_int_distribution<int> len_dist(0, max_len);
  std::uniform_int_distribution<int> exp_dist(-max_exp, max_exp);
  for (int attempt = 0; attempt < 256; ++attempt) {
    Word w;
    w.start = base;
    w.head = exp_dist(rng);
    int at = base;
    int len = len_dist(rng);
    bool ok = true;
    for (int i = 0; i < len; ++i) {
      const auto& out = g.edges_at(at);
      if (out.empty()) {
        ok = false;
        break;
      }
      int e = out[std::uniform_int_distribution<size_t>(0, out.size() - 1)(rng)];
      w.syls.push_back({e, Int(exp_dist(rng))});
      at = g.terminus(e);
    }
    if (ok && at == base) return w;
  }
  Word w;
  w.start = base;
  return w;
}

// Independent word-problem oracle: apply Britton pinches in RANDOM order
// until none applies. By Britton's lemma the element is trivial iff the
// result is the empty word; the reduced length is strategy-independent.
inline Word oracle_reduce_random_order(const GraphOfGroups& g, Word w,
                                       std::mt19937_64& rng) {
  while (true) {
    std::vector<int> pinches;
    for (int i = 0; i + 1 < w.length(); ++i)
      if (w.syls[i + 1].edge == g.reverse(w.syls[i].edge) &&
          divides(g.label(w.syls[i + 1].edge), w.syls[i].exp))
        pinches.push_back(i);
    if (pinches.empty()) return w;
    int i = pinches[std::uniform_int_distribution<size_t>(
        0, pinches.size() - 1)(rng)];
    int e_next = w.syls[i + 1].edge;
    Int add = w.syls[i].exp / g.label(e_next) * g.label(w.syls[i].edge) +
              w.syls[i + 1].exp;
    if (i == 0)
      w.head += add;
    else
      w.syls[i - 1].exp += add;
    w.syls.erase(w.syls.begin() + i, w.syls.begin() + i + 2);
  }
}

inline bool oracle_is_trivial(const GraphOfGroups& g, const Word& w,
                              std::mt19937_64& rng) {
  Word r = oracle_reduce_random_order(g, w, rng);
  return r.syls.empty() && r.head == 0;
}

// Rewrite a word by random applications of a^{m p} -> t_e a^{m q} t_{ebar}
// and exponent splits; the element is unchanged. Exercises normal forms.
inline Word random_equivalent_word(const GraphOfGroups& g, const Word& w0,
                                   std::mt19937_64& rng, int moves) {
  Word w = w0;
  for (int step = 0; step < moves; ++step) {
    // positions: 0..len (exponent slots)
    int slot = std::uniform_int_distribution<int>(0, w.length())(rng);
    int at = slot == 0 ? w.start : g.terminus(w.syls[slot - 1].edge);
    const auto& out = g.edges_at(at);
    if (out.empty()) continue;
    int e =
        out[std::uniform_int_distribution<size_t>(0, out.size() - 1)(rng)];
    long long m = std::uniform_int_distribution<int>(-2, 2)(rng);
    // a^{m p} = t_e a^{m q} t_{ebar}: subtract m p from the slot and insert.
    Int mp = Int(m) * g.label(e);
    Int mq = Int(m) * g.label(g.reverse(e));
    if (slot == 0)
      w.head -= mp;
    else
      w.syls[slot - 1].exp -= mp;
    Syllable s1{e, mq};
    Syllable s2{g.reverse(e), Int(0)};
    w.syls.insert(w.syls.begin() + slot, {s1, s2});
  }
  return w;
}

}  // namespace gbs::test

#endif  // GBS_TESTUTIL_HPP
