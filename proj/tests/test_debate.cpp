#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <set>

#include "debaterl/debate.hpp"

using namespace debaterl;

namespace {

std::uint64_t to_mask(const EvidenceSet& ev) {
  std::uint64_t m = 0;
  for (std::size_t e : ev) m |= 1ULL << e;
  return m;
}

// Random table scorer over evidence subsets; set-valued by construction.
EvidenceScorer table_scorer(std::size_t d, Rng& rng) {
  auto table = std::make_shared<std::vector<double>>(std::size_t(2) << d);
  for (auto& v : *table) v = rng.uniform() * 2.0 - 1.0;
  return [table, d](int action, const EvidenceSet& ev, const PatientState&) {
    std::uint64_t key = to_mask(ev) | (std::uint64_t(action & 1) << d);
    return (*table)[key];
  };
}

// Judge likes action 0 only when evidence index 2 is revealed.
EvidenceScorer feature2_scorer() {
  return [](int action, const EvidenceSet& ev, const PatientState&) {
    if (action != 0) return 0.5;
    return to_mask(ev) & 4 ? 1.0 : 0.0;
  };
}

DebateStrategy lowest_legal(std::size_t d) {
  return [d](const DebateContext&, const DebateNode& node, int) {
    return legal_evidence(node, d).front();
  };
}

DebateStrategy random_legal(std::size_t d, std::shared_ptr<Rng> rng) {
  return [d, rng](const DebateContext&, const DebateNode& node, int) {
    auto legal = legal_evidence(node, d);
    return legal[std::size_t(rng->uniform_int(0, std::int64_t(legal.size()) - 1))];
  };
}

// Reference minimax over move sequences, no memoization.
double brute_value(const DebateContext& ctx, const EvidenceScorer& scorer,
                   std::size_t d, const GameConfig& cfg, DebateNode& node,
                   std::size_t turn) {
  if (turn == cfg.L)
    return debate_utility(scorer, ctx, node.proposed, cfg.utility);
  bool maximizing = turn % 2 == 0;
  double best = maximizing ? -1e300 : 1e300;
  for (std::size_t e = 0; e < d; ++e) {
    if (node.contains(e)) continue;
    node.proposed.push_back(e);
    double v = brute_value(ctx, scorer, d, cfg, node, turn + 1);
    node.proposed.pop_back();
    best = maximizing ? std::max(best, v) : std::min(best, v);
  }
  return best;
}

}  // namespace

TEST_CASE("legal_evidence complements the node") {
  DebateNode empty;
  CHECK(legal_evidence(empty, 8).size() == 8);
  DebateNode seven{{0, 1, 2, 3, 4, 5, 6}};
  auto legal = legal_evidence(seven, 8);
  REQUIRE(legal.size() == 1);
  CHECK(legal[0] == 7);
  DebateNode some{{3, 5}};
  CHECK(legal_evidence(some, 8).size() == 8 - 2);
}

TEST_CASE("utility cases and antisymmetry") {
  auto scorer = [](int action, const EvidenceSet&, const PatientState&) {
    return action == 0 ? 0.7 : 0.3;
  };
  DebateContext ctx{{}, 0, 1};
  DebateContext swapped{{}, 1, 0};
  EvidenceSet ev = {0, 1};
  CHECK(debate_utility(scorer, ctx, ev, UtilityKind::Sign) == 1.0);
  CHECK(debate_utility(scorer, swapped, ev, UtilityKind::Sign) == -1.0);
  CHECK(debate_utility(scorer, ctx, ev, UtilityKind::Difference) ==
        doctest::Approx(0.4));
  CHECK(debate_utility(scorer, swapped, ev, UtilityKind::Difference) ==
        doctest::Approx(-0.4));
  auto equal = [](int, const EvidenceSet&, const PatientState&) {
    return 0.25;
  };
  CHECK(debate_utility(equal, ctx, ev, UtilityKind::Sign) == 0.0);
}

TEST_CASE("play_debate interleaves scripted strategies") {
  GameConfig cfg;
  cfg.L = 4;
  DebateContext ctx{{}, 0, 1};
  auto p1 = [](const DebateContext&, const DebateNode& node,
               int) -> std::size_t { return node.proposed.size(); };
  std::size_t hi = 7;
  auto p2 = [&hi](const DebateContext&, const DebateNode& node,
                  int) -> std::size_t { return hi - node.proposed.size(); };
  auto scorer = feature2_scorer();
  Rng rng(1);
  DebateTranscript t = play_debate(ctx, p1, p2, scorer, cfg, rng);
  CHECK(t.tau == 0);
  CHECK(t.terminal.proposed == std::vector<std::size_t>{0, 6, 2, 4});
  CHECK(t.moves[0].second == 0);
  CHECK(t.moves[1].second == 1);
  CHECK(t.moves[3].second == 1);
  CHECK(t.u1 == 1.0);  // evidence 2 was revealed
}

TEST_CASE("tau permutes order but not the set-valued utility") {
  GameConfig cfg;
  cfg.L = 4;
  cfg.first_mover = FirstMover::Randomized;
  DebateContext ctx{{}, 0, 1};
  Rng srng(2);
  auto scorer = table_scorer(6, srng);
  auto s = lowest_legal(6);
  bool seen[2] = {false, false};
  double u[2] = {0, 0};
  std::vector<std::size_t> order[2];
  Rng rng(3);
  for (int i = 0; i < 64 && !(seen[0] && seen[1]); ++i) {
    DebateTranscript t = play_debate(ctx, s, s, scorer, cfg, rng);
    seen[t.tau] = true;
    u[t.tau] = t.u1;
    order[t.tau] = t.terminal.proposed;
  }
  REQUIRE((seen[0] && seen[1]));
  CHECK(u[0] == u[1]);
  std::multiset<std::size_t> a(order[0].begin(), order[0].end());
  std::multiset<std::size_t> b(order[1].begin(), order[1].end());
  CHECK(a == b);
}

TEST_CASE("random rollouts: zero-sum utility, no repeated evidence") {
  GameConfig cfg;
  cfg.L = 6;
  cfg.first_mover = FirstMover::Randomized;
  Rng srng(4);
  auto scorer = table_scorer(8, srng);
  auto prng = std::make_shared<Rng>(5);
  auto s = random_legal(8, prng);
  Rng rng(6);
  for (int i = 0; i < 1000; ++i) {
    DebateContext ctx{{}, int(rng.uniform_int(0, 24)), 0};
    if (ctx.a_first == 0) ctx.a_second = 1;
    DebateTranscript t = play_debate(ctx, s, s, scorer, cfg, rng);
    std::set<std::size_t> uniq(t.terminal.proposed.begin(),
                               t.terminal.proposed.end());
    REQUIRE(uniq.size() == cfg.L);
    DebateContext sw{ctx.state, ctx.a_second, ctx.a_first};
    double u2 = debate_utility(scorer, sw, t.terminal.proposed, cfg.utility);
    REQUIRE(t.u1 + u2 == 0.0);
  }
}

TEST_CASE("solve_exact on the hand-crafted feature-2 judge") {
  GameConfig cfg;
  cfg.L = 2;
  auto scorer = feature2_scorer();
  DebateContext ctx{{}, 0, 1};
  // Player 1 can reveal evidence 2 itself; nothing player 2 adds removes it.
  DebateSolution sol = solve_exact(ctx, scorer, 4, cfg);
  CHECK(sol.value == 1.0);
  REQUIRE(sol.principal_variation.size() == 2);
  CHECK(sol.principal_variation[0] == 2);
  // Arguing action 1, player 1 loses: player 2 reveals 2 in response.
  DebateContext sw{{}, 1, 0};
  CHECK(solve_exact(sw, scorer, 4, cfg).value == -1.0);
}

TEST_CASE("solve_exact matches exhaustive pure-strategy-profile minimax") {
  // D=4, L=2: player 1 picks e1 (4 strategies); player 2 is a map
  // e1 -> e2 != e1 (3^4 strategies).
  GameConfig cfg;
  cfg.L = 2;
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto scorer = table_scorer(4, rng);
    DebateContext ctx{{}, 0, 1};
    double maximin = -1e300;
    for (std::size_t e1 = 0; e1 < 4; ++e1) {
      double worst = 1e300;
      for (int code = 0; code < 81; ++code) {
        int c = code;
        std::size_t resp[4];
        for (int i = 0; i < 4; ++i) {
          int r = c % 3;
          c /= 3;
          resp[i] = std::size_t(r) >= std::size_t(i) ? std::size_t(r) + 1
                                                     : std::size_t(r);
        }
        EvidenceSet ev = {e1, resp[e1]};
        worst = std::min(worst,
                         debate_utility(scorer, ctx, ev, cfg.utility));
      }
      maximin = std::max(maximin, worst);
    }
    CHECK(solve_exact(ctx, scorer, 4, cfg).value == maximin);
  }
}

TEST_CASE("solve_exact matches unmemoized minimax at L=4") {
  GameConfig cfg;
  cfg.L = 4;
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto scorer = table_scorer(6, rng);
    DebateContext ctx{{}, 0, 1};
    DebateNode node;
    double ref = brute_value(ctx, scorer, 6, cfg, node, 0);
    CHECK(solve_exact(ctx, scorer, 6, cfg).value == ref);
  }
}

TEST_CASE("swapping the argued actions negates the value when the same "
          "player keeps the opening turn") {
  // tau=1 hands even turns to the a_second player, so the swapped game is
  // the original game tree seen from the other side.
  GameConfig cfg;
  Rng rng(9);
  for (std::size_t L : {std::size_t(2), std::size_t(4)}) {
    cfg.L = L;
    for (int trial = 0; trial < 20; ++trial) {
      auto scorer = table_scorer(6, rng);
      DebateContext ctx{{}, 0, 1};
      DebateContext sw{{}, 1, 0};
      CHECK(solve_exact(ctx, scorer, 6, cfg, 0).value ==
            -solve_exact(sw, scorer, 6, cfg, 1).value);
    }
  }
}

TEST_CASE("sign-utility value lies in {-1, 0, +1} and PV is legal") {
  GameConfig cfg;
  cfg.L = 4;
  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    auto scorer = table_scorer(8, rng);
    DebateContext ctx{{}, 3, 17};
    DebateSolution sol = solve_exact(ctx, scorer, 8, cfg);
    CHECK((sol.value == -1.0 || sol.value == 0.0 || sol.value == 1.0));
    std::set<std::size_t> uniq(sol.principal_variation.begin(),
                               sol.principal_variation.end());
    CHECK(uniq.size() == cfg.L);
  }
}

TEST_CASE("best response bounds: exploitability of maximin is zero") {
  GameConfig cfg;
  cfg.L = 2;
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto scorer = table_scorer(4, rng);
    DebateContext ctx{{}, 0, 1};
    double value = solve_exact(ctx, scorer, 4, cfg).value;

    // Any fixed strategy does no better than the game value.
    for (std::size_t e1 = 0; e1 < 4; ++e1) {
      auto fixed = [e1](const DebateContext&, const DebateNode&, int) {
        return e1;
      };
      CHECK(best_response_value(ctx, fixed, scorer, 4, cfg) <= value);
    }

    // The solver's own first move achieves the value exactly.
    std::size_t pv0 = solve_exact(ctx, scorer, 4, cfg).principal_variation[0];
    auto opt = [pv0](const DebateContext&, const DebateNode&, int) {
      return pv0;
    };
    CHECK(best_response_value(ctx, opt, scorer, 4, cfg) == value);
  }
}

TEST_CASE("debate rewards: alpha scaling and bound") {
  GameConfig cfg;
  cfg.L = 2;
  cfg.alpha = 5.0;
  auto scorer = feature2_scorer();
  DebateContext ctx{{}, 0, 1};
  CHECK(debate_reward_exact(ctx, scorer, 4, cfg) == 5.0);

  Rng rng(12);
  cfg.L = 4;
  for (int trial = 0; trial < 50; ++trial) {
    auto rs = table_scorer(6, rng);
    double r = debate_reward_exact(ctx, rs, 6, cfg);
    CHECK(std::abs(r) <= 5.0);
  }
}

TEST_CASE("solver guards: odd L, oversized budget") {
  GameConfig cfg;
  auto scorer = feature2_scorer();
  DebateContext ctx{{}, 0, 1};
  cfg.L = 3;
  CHECK_THROWS(solve_exact(ctx, scorer, 8, cfg));
  cfg.L = 10;
  CHECK_THROWS(solve_exact(ctx, scorer, 12, cfg));  // 12^10 > 1e7
}

TEST_CASE("transcript formatting lists proposers in order") {
  GameConfig cfg;
  cfg.L = 2;
  DebateContext ctx{{}, 4, 9};
  auto s = lowest_legal(4);
  Rng rng(13);
  DebateTranscript t = play_debate(ctx, s, s, feature2_scorer(), cfg, rng);
  std::string text = format_transcript(t);
  CHECK(text.find("a_first=4") != std::string::npos);
  CHECK(text.find("turn p1 e0") != std::string::npos);
  CHECK(text.find("turn p2 e1") != std::string::npos);
  CHECK(text.find("u1 ") != std::string::npos);
}
