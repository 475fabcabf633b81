#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cirl/core.hpp"
#include "cirl/oracle.hpp"
#include "cirl/policy.hpp"

namespace cirl {

/// Numerical slack for every exact-inequality certificate: double-precision
/// accumulation over at most 50,000 contexts.
inline constexpr double kBoundSlack = 1e-9;

struct BoundTerm {
    int t = 0;
    double drift = 0.0;  // Delta_t (or Delta^env_t)
    double local = 0.0;  // eps_t (or delta_t)
    int weight = 0;      // H - t
};

/// Executable certificate of one inequality. `lhs <= rhs + 1e-9` is the
/// primary check; the secondary flags certify the companion inequalities
/// (per-step recurrence, intermediate form, and intermediate <= final) so a
/// regression pinpoints which computation broke.
struct BoundReport {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = true;
    double slack = 0.0; // rhs - lhs
    std::vector<BoundTerm> per_term;

    double rhs_intermediate = 0.0;
    bool intermediate_holds = true;
    bool dominance_holds = true; // intermediate <= final
    bool recurrence_holds = true;
    int tightest_t = -1;

    bool all_hold() const {
        return holds && intermediate_holds && dominance_holds && recurrence_holds;
    }
};

using JointMatrix = std::vector<std::vector<double>>; // p[x][y]

/// || p - q ||_1 over the joint <= || p_x - q_x ||_1 + E_{x~q_x} || p(y|x) - q(y|x) ||_1.
/// Conditional rows at zero marginal mass carry weight zero.
BoundReport check_joint_decomposition(const JointMatrix& p, const JointMatrix& q);

/// Delta_{t+1} <= Delta_t + eps_t for every t, and the telescoped form
/// Delta_t <= sum_{i<t} eps_i. The primary lhs/rhs pair is the tightest
/// telescoped check (smallest slack); tightest_t records its t.
BoundReport check_error_propagation(const Policy& pi, const Policy& pi_ref,
                                    const Environment& env, const TransitionKernel& kernel);

/// |J(pi) - J(pi_ref)| <= R_max * sum_t (H - t) eps_t (primary pair), with the
/// intermediate form R_max * sum_t (Delta_t + eps_t) and its dominance by the
/// final form certified alongside.
BoundReport check_theorem1(const Environment& env, const TransitionKernel& kernel,
                           const Policy& pi, const Policy& pi_ref);

/// |J_real(pi) - J_sim(pi)| <= R_max * sum_t (H - t) delta_t, plus the
/// Delta^env recurrence Delta^env_{t+1} <= Delta^env_t + delta_t at every t.
BoundReport check_theorem2(const Environment& env, const TransitionKernel& kernel_real,
                           const TransitionKernel& kernel_sim, const Policy& pi);

/// One (env, kernel, pi, pi_ref) tuple for bound certification; scenario
/// constructors adapt into this shape.
struct BoundInstance {
    Environment env;
    TransitionKernel kernel;
    Policy pi;
    Policy pi_ref;
};

struct SweepRow {
    int horizon = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

/// Growth-order sweep over horizons for a family with constant per-step
/// deviation eps_step (the family contract; verified against exact DP within
/// 1e-9). rhs is the closed form eps_step * R_max * H*(H+1)/2, computed as a
/// bit-level arithmetic identity, not by summation.
std::vector<SweepRow> quadratic_sweep(const std::function<BoundInstance(int)>& family,
                                      const std::vector<int>& horizons, double eps_step);

} // namespace cirl
