#pragma once

#include <string>
#include <vector>

#include "marketlcp/market.hpp"
#include "marketlcp/simplex.hpp"

namespace marketlcp {

// A strategy profile lists every primal decision in one vector: generator
// blocks, demand blocks, then the angle of each non-reference bus.
class StrategyIndex {
 public:
  explicit StrategyIndex(const MarketCase& c);

  int size() const { return size_; }
  int gen_block(int unit, int block) const { return gen_[static_cast<std::size_t>(unit)] + block; }
  int demand_block(int unit, int block) const {
    return dem_[static_cast<std::size_t>(unit)] + block;
  }
  int angle(int bus) const { return angle_[static_cast<std::size_t>(bus)]; }  // -1 at reference

 private:
  std::vector<int> gen_, dem_, angle_;
  int size_ = 0;
};

Vector profile_of(const MarketCase& c, const EquilibriumSolution& sol);

enum class PlayerKind { GenCo, ConCo, Iso };

struct PlayerView {
  PlayerKind kind = PlayerKind::GenCo;
  int unit = -1;  // generator or demand index; -1 for the ISO
  std::string id;
  std::vector<int> vars;  // positions in the strategy profile
  // Own constraint set over vars (objective left empty).
  LinearProgram constraints;
};

// GenCos in generator order, then ConCos in demand order, then the ISO.
std::vector<PlayerView> players(const MarketCase& c);

// Linear payoff u(s) = g . s over the whole profile, with prices fixed.
Vector payoff_gradient(const MarketCase& c, const std::vector<double>& lmp,
                       const PlayerView& player);

double payoff(const MarketCase& c, const std::vector<double>& lmp, const PlayerView& player,
              const Vector& profile);

struct BestResponse {
  double gap = 0.0;
  double best_payoff = 0.0;
  double realized_payoff = 0.0;
  Vector strategy;  // maximizer over the player's vars
  std::string method;
};

// Maximizes objective . v over the polytope; exact vertex enumeration for at
// most 12 bounded variables, simplex otherwise.
BestResponse maximize_over(const LinearProgram& polytope, const Vector& objective);

BestResponse best_response_gap(const MarketCase& c, const EquilibriumSolution& sol,
                               const PlayerView& player);

struct EquilibriumCertificate {
  std::vector<std::string> player_ids;
  std::vector<double> gaps;  // $/h
  double epsilon = 0.0;
  double tolerance = 0.0;
  bool is_nash_within = true;
  std::string method;
};

EquilibriumCertificate certify_epsilon_equilibrium(const MarketCase& c,
                                                   const EquilibriumSolution& sol,
                                                   double tol = 1e-6);

struct GameDistance {
  double alpha = 0.0;
  std::vector<std::string> player_ids;
  std::vector<double> per_player;  // sup of |u_a - u_b| for each payoff owner
  std::vector<std::string> profiles;  // description of profiles evaluated
  bool exact = true;
  std::string note;
};

// Sup over the intersection of both games' strategy sets of the payoff
// difference. Payoffs are linear and the joint set is a product of
// polytopes, so the sup is the sum of per-player linear programs.
GameDistance game_distance(const MarketCase& a, const EquilibriumSolution& sol_a,
                           const MarketCase& b, const EquilibriumSolution& sol_b);

struct TwoAlphaReport {
  double alpha = 0.0;
  double epsilon = 0.0;       // perturbed equilibrium evaluated in the nominal game
  double own_epsilon = 0.0;   // perturbed equilibrium in its own game
  double tolerance = 1e-6;
  bool holds = true;
  std::string worst_player;
  GameDistance distance;
};

TwoAlphaReport evaluate_two_alpha(const MarketCase& nominal, const EquilibriumSolution& sol_nominal,
                                  const MarketCase& perturbed,
                                  const EquilibriumSolution& sol_perturbed, double tol = 1e-6);

// As above, throwing AssertionFailed when epsilon > 2 alpha + tol or the
// perturbed solution is not an equilibrium of its own game.
TwoAlphaReport check_two_alpha(const MarketCase& nominal, const MarketCase& perturbed,
                               const EquilibriumSolution& sol_perturbed, double tol = 1e-6,
                               const MarketOptions& opts = {});

}  // namespace marketlcp
