#ifndef SATMUD_BASELINES_HPP
#define SATMUD_BASELINES_HPP

#include <string>

#include "satmud/rate_model.hpp"

namespace satmud {

enum class BaselineKind { greedy, round_robin, centralized, exhaustive };

// Maps an allocator name from a plan/config to its kind; returns false for
// unknown names (including "proposed", which is not a baseline).
bool baseline_from_name(const std::string& name, BaselineKind* kind);

// Users in seeded random order pick their best remaining satellites by
// aggregate gain sum_n |h[n][k][j]|^2. Each user takes max(1, ceil(q_l))
// satellites while capacity lasts; a user that cannot reach ceil(q_l) >= 1
// raises InfeasibleError, while with q_l < 1 it is simply left unassigned.
MatchingMatrix greedy_allocate(const Scenario& sc, int q_s, double q_l, Rng& rng);

// Channel-oblivious: users in seeded random order are assigned cyclically to
// satellites, skipping full ones.
MatchingMatrix round_robin_allocate(const Scenario& sc, int q_s, double q_l, Rng& rng);

// All-ones matching: every satellite detects every user. Feasibility is
// deliberately waived; this is the upper bound, not a contender.
MatchingMatrix centralized_allocate(int K, int J);

// Global optimum over all binary Q satisfying C1-C3, ties broken by
// lexicographic Q (row-major). Refuses instances whose candidate count
// exceeds the budget.
MatchingMatrix exhaustive_allocate(const Scenario& sc, const RateModelParams& params,
                                   int q_s, double q_l, double budget = 1e7);

// Upper bound on the number of row-wise candidates the exhaustive search
// would consider: (sum_{t >= ceil(q_l)} C(J, t))^K.
double exhaustive_candidate_count(int K, int J, double q_l);

}  // namespace satmud

#endif  // SATMUD_BASELINES_HPP
