#ifndef GBRIDGE_MIXING_LAW_HPP
#define GBRIDGE_MIXING_LAW_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gbridge/rng.hpp"
#include "gbridge/specfun.hpp"

namespace gbridge {

// Prior law of the random pinning time tau: finitely many atoms plus an
// optional absolutely continuous part represented by quadrature nodes and
// weights.  Immutable after construction; total mass 1 within 1e-12 and all
// support strictly positive.
class MixingLaw {
 public:
  struct Atom {
    double location;
    double weight;
  };

  static constexpr double kMinLocation = 1e-9;
  static constexpr double kMassTolerance = 1e-12;
  static constexpr double kMaxTruncatedMass = 1e-6;

  static MixingLaw dirac(double r) { return discrete({{r, 1.0}}); }

  static MixingLaw discrete(std::vector<Atom> atoms) {
    return MixingLaw(std::move(atoms), {}, {});
  }

  // Exponential(rate) truncated to (0, upper]; geometric node spacing.
  static MixingLaw exponential_grid(double rate, double upper,
                                    std::size_t nodes = 512) {
    if (!(rate > 0.0) || !(upper > 0.0))
      throw std::invalid_argument("MixingLaw::exponential_grid: bad parameters");
    const double truncated = std::exp(-rate * upper);
    if (truncated >= kMaxTruncatedMass)
      throw std::invalid_argument(
          "MixingLaw::exponential_grid: mass beyond truncation is " +
          std::to_string(truncated) + ", must be < 1e-6");
    auto cdf = [rate](double x) { return -std::expm1(-rate * x); };
    return from_cell_cdf(cdf, upper, nodes);
  }

  static MixingLaw uniform_grid(double lo, double hi, std::size_t nodes = 512) {
    if (!(lo > 0.0) || !(hi > lo))
      throw std::invalid_argument("MixingLaw::uniform_grid: need 0 < lo < hi");
    std::vector<double> grid(nodes), weights(nodes, 1.0 / nodes);
    const double h = (hi - lo) / nodes;
    for (std::size_t i = 0; i < nodes; ++i) grid[i] = lo + (i + 0.5) * h;
    return MixingLaw({}, std::move(grid), std::move(weights));
  }

  // Gamma(shape, rate) truncated to (0, upper].
  static MixingLaw gamma_grid(double shape, double rate, double upper,
                              std::size_t nodes = 512) {
    if (!(shape > 0.0) || !(rate > 0.0) || !(upper > 0.0))
      throw std::invalid_argument("MixingLaw::gamma_grid: bad parameters");
    auto cdf = [shape, rate](double x) {
      return x <= 0.0 ? 0.0 : regularized_lower_gamma(shape, rate * x);
    };
    const double tail = 1.0 - cdf(upper);
    if (tail >= kMaxTruncatedMass)
      throw std::invalid_argument(
          "MixingLaw::gamma_grid: mass beyond truncation is " +
          std::to_string(tail) + ", must be < 1e-6");
    return from_cell_cdf(cdf, upper, nodes);
  }

  static MixingLaw from_grid(std::vector<double> grid, std::vector<double> weights) {
    return MixingLaw({}, std::move(grid), std::move(weights));
  }

  static MixingLaw mixed(std::vector<Atom> atoms, std::vector<double> grid,
                         std::vector<double> weights) {
    return MixingLaw(std::move(atoms), std::move(grid), std::move(weights));
  }

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& grid_weights() const { return grid_weights_; }
  bool has_density_part() const { return !grid_.empty(); }

  double min_support() const {
    double m = std::numeric_limits<double>::infinity();
    if (!atoms_.empty()) m = std::min(m, atoms_.front().location);
    if (!grid_.empty()) m = std::min(m, grid_.front());
    return m;
  }

  double max_support() const {
    double m = 0.0;
    if (!atoms_.empty()) m = std::max(m, atoms_.back().location);
    if (!grid_.empty()) m = std::max(m, grid_.back());
    return m;
  }

  // F(t) = P(tau <= t); right-continuous.
  double cdf(double t) const {
    if (!(t >= 0.0)) throw std::domain_error("MixingLaw::cdf: t must be >= 0");
    double mass = 0.0;
    for (const auto& a : atoms_)
      if (a.location <= t) mass += a.weight;
    for (std::size_t i = 0; i < grid_.size(); ++i)
      if (grid_[i] <= t) mass += grid_weights_[i];
    return std::min(mass, 1.0);
  }

  double tail_mass(double t) const { return integrate_tail(t, [](double) { return 1.0; }); }

  // int_{(t,inf)} f(r) P_tau(dr): exact atom sum plus quadrature nodes.
  template <class F>
  double integrate_tail(double t, F&& f) const {
    double sum = 0.0;
    auto add = [&](double r, double w) {
      const double v = f(r);
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "MixingLaw::integrate_tail: non-finite integrand at r = " << r;
        throw std::runtime_error(os.str());
      }
      sum += w * v;
    };
    for (const auto& a : atoms_)
      if (a.location > t) add(a.location, a.weight);
    for (std::size_t i = 0; i < grid_.size(); ++i)
      if (grid_[i] > t) add(grid_[i], grid_weights_[i]);
    return sum;
  }

  template <class F>
  double integrate(F&& f) const {
    return integrate_tail(0.0, std::forward<F>(f));
  }

  // E[tau^alpha]; diagnostic for the tail condition.
  double tail_moment(double alpha) const {
    if (!(alpha > 0.0)) throw std::domain_error("MixingLaw::tail_moment: alpha must be > 0");
    return integrate([alpha](double r) { return std::pow(r, alpha); });
  }

  // Inverse-CDF draw over the combined discrete representation.
  double sample(Rng& rng) const {
    const double u = rng.uniform() * total_mass_;
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    std::size_t idx = static_cast<std::size_t>(it - cumulative_.begin());
    if (idx >= locations_.size()) idx = locations_.size() - 1;
    return locations_[idx];
  }

 private:
  MixingLaw(std::vector<Atom> atoms, std::vector<double> grid,
            std::vector<double> grid_weights)
      : atoms_(std::move(atoms)),
        grid_(std::move(grid)),
        grid_weights_(std::move(grid_weights)) {
    std::sort(atoms_.begin(), atoms_.end(),
              [](const Atom& a, const Atom& b) { return a.location < b.location; });
    validate();
    build_sampling_table();
  }

  template <class Cdf>
  static MixingLaw from_cell_cdf(Cdf&& cdf, double upper, std::size_t nodes) {
    if (nodes < 2) throw std::invalid_argument("MixingLaw: need at least 2 nodes");
    // Geometric cell edges from upper*1e-8 up; first cell absorbs (0, e0].
    const double lo = upper * 1e-8;
    std::vector<double> edges(nodes + 1);
    const double ratio = std::pow(upper / lo, 1.0 / nodes);
    edges[0] = lo;
    for (std::size_t i = 1; i <= nodes; ++i) edges[i] = edges[i - 1] * ratio;
    edges[nodes] = upper;
    std::vector<double> grid(nodes), weights(nodes);
    double total = 0.0;
    double prev = 0.0;  // include mass below the first edge in cell 0
    for (std::size_t i = 0; i < nodes; ++i) {
      const double c = cdf(edges[i + 1]);
      grid[i] = 0.5 * (edges[i] + edges[i + 1]);
      weights[i] = std::max(c - prev, 0.0);
      total += weights[i];
      prev = c;
    }
    for (auto& w : weights) w /= total;
    return MixingLaw({}, std::move(grid), std::move(weights));
  }

  void validate() const {
    if (atoms_.empty() && grid_.empty())
      throw std::invalid_argument("MixingLaw: empty law");
    if (grid_.size() != grid_weights_.size())
      throw std::invalid_argument("MixingLaw: grid/weight size mismatch");
    double mass = 0.0;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const auto& a = atoms_[i];
      if (!(a.location >= kMinLocation))
        throw std::invalid_argument("MixingLaw: atom location below 1e-9");
      if (!(a.weight > 0.0) || !(a.weight <= 1.0))
        throw std::invalid_argument("MixingLaw: atom weight outside (0,1]");
      if (i > 0 && !(atoms_[i - 1].location < a.location))
        throw std::invalid_argument("MixingLaw: atom locations must be distinct");
      mass += a.weight;
    }
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      if (!(grid_[i] >= kMinLocation))
        throw std::invalid_argument("MixingLaw: grid node below 1e-9");
      if (i > 0 && !(grid_[i - 1] < grid_[i]))
        throw std::invalid_argument("MixingLaw: grid nodes must be strictly increasing");
      if (!(grid_weights_[i] >= 0.0))
        throw std::invalid_argument("MixingLaw: negative grid weight");
      mass += grid_weights_[i];
    }
    if (std::fabs(mass - 1.0) > kMassTolerance)
      throw std::invalid_argument("MixingLaw: total mass " + std::to_string(mass) +
                                  " differs from 1 by more than 1e-12");
  }

  void build_sampling_table() {
    locations_.clear();
    cumulative_.clear();
    double c = 0.0;
    for (const auto& a : atoms_) {
      c += a.weight;
      locations_.push_back(a.location);
      cumulative_.push_back(c);
    }
    for (std::size_t i = 0; i < grid_.size(); ++i) {
      c += grid_weights_[i];
      locations_.push_back(grid_[i]);
      cumulative_.push_back(c);
    }
    total_mass_ = c;
  }

  std::vector<Atom> atoms_;
  std::vector<double> grid_;
  std::vector<double> grid_weights_;
  std::vector<double> locations_;
  std::vector<double> cumulative_;
  double total_mass_ = 1.0;
};

}  // namespace gbridge

#endif  // GBRIDGE_MIXING_LAW_HPP
