// ocs.hpp - the m-way online correlated selector: per-element win sequences,
// the strength tournament, and the probability-vector (continuous) wrapper.
#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <utility>
#include <vector>

#include "coupling.hpp"
#include "random.hpp"
#include "win_distribution.hpp"

namespace mocs {

using ElementId = std::int64_t;

/// Id of the persistent dummy element that absorbs slack probability mass.
inline constexpr ElementId kDummy = std::numeric_limits<ElementId>::min();

/// Immutable part of the selector: W and one coupling per multiplicity.
/// Expensive to build, shared read-only by every selector instance.
struct OCSModel {
  WinModel win;
  std::vector<TournamentCoupling> couplings;  // index r - 1, r = 1..m-1

  int m() const { return win.params.m; }
  const TournamentCoupling& coupling(int r) const { return couplings.at(static_cast<std::size_t>(r - 1)); }
};

inline std::shared_ptr<const OCSModel> build_ocs_model(const SeedParams& params) {
  auto model = std::make_shared<OCSModel>();
  model->win = build_win_model(params);
  for (int r = 1; r < params.m; ++r)
    model->couplings.push_back(build_coupling(enumerate_prefix(model->win, r), r, params.m));
  return model;
}

/// One round of the discrete selector: (element, multiplicity) pairs.
using RoundInput = std::vector<std::pair<ElementId, int>>;

/// Collapses a list of ids (with repeats) into a round.
inline RoundInput round_from_ids(const std::vector<ElementId>& ids) {
  std::map<ElementId, int> count;
  for (ElementId id : ids) ++count[id];
  return RoundInput(count.begin(), count.end());
}

class OCSState {
 public:
  struct ElementState {
    SeedProcess seeds;
    std::vector<double> x;  // win sequence generated so far
    std::size_t k = 0;      // number of entries consumed (next index is k)
  };

  OCSState(std::shared_ptr<const OCSModel> model, std::uint64_t seed)
      : model_(std::move(model)), seed_(seed), rng_(make_stream(seed, 0x7ea5u)) {}

  const OCSModel& model() const { return *model_; }

  /// Desired win probability of `id` at multiplicity r: 1 - prod (1 - x) over
  /// the next r entries of its win sequence.
  double desired_win(ElementId id, int r) {
    ElementState& e = element(id);
    while (e.x.size() < e.k + static_cast<std::size_t>(r)) e.x.push_back(model_->win.win(e.seeds.next()));
    return mocs::desired_win(e.x.begin() + static_cast<std::ptrdiff_t>(e.k),
                             e.x.begin() + static_cast<std::ptrdiff_t>(e.k) + r);
  }

  /// Number of win-sequence entries consumed so far (k(i) - 1).
  std::size_t consumed(ElementId id) const {
    auto it = elements_.find(id);
    return it == elements_.end() ? 0 : it->second.k;
  }

  ElementId step(const RoundInput& round) {
    if (round.empty()) throw std::invalid_argument("ocs_step: empty round");
    const int m = model_->m();
    int total = 0;
    for (const auto& [id, r] : round) {
      if (r < 1) throw std::invalid_argument("ocs_step: multiplicities must be >= 1");
      total += r;
    }
    if (total != m) throw std::invalid_argument("ocs_step: multiplicities must sum to m");

    ElementId winner = round.front().first;
    if (round.size() == 1) {
      // A single element of multiplicity m wins outright.
    } else {
      double best = -1.0;
      // Ties (measure zero) go to the lowest id: scan in id order, strict >.
      std::vector<std::pair<ElementId, int>> order(round.begin(), round.end());
      std::sort(order.begin(), order.end());
      for (const auto& [id, r] : order) {
        const double w = desired_win(id, r);
        const double s = strength(model_->coupling(r), w, rng_);
        if (s > best) {
          best = s;
          winner = id;
        }
      }
    }
    for (const auto& [id, r] : round) element(id).k += static_cast<std::size_t>(r);
    return winner;
  }

  /// Probability-vector round: m iid draws from `probs` (slack to the dummy).
  /// Returns the winner, kDummy meaning "no selection".
  ElementId continuous_step(const std::vector<std::pair<ElementId, double>>& probs) {
    double total = 0.0;
    for (const auto& [id, q] : probs) {
      if (q < 0.0) throw std::invalid_argument("continuous_step: negative probability");
      if (id == kDummy) throw std::invalid_argument("continuous_step: reserved id");
      total += q;
    }
    if (total > 1.0 + 1e-12) throw std::invalid_argument("continuous_step: probabilities sum above 1");
    std::map<ElementId, int> count;
    for (int d = 0; d < model_->m(); ++d) {
      double u = uniform01(rng_);
      ElementId pick = kDummy;
      for (const auto& [id, q] : probs) {
        if (u < q) {
          pick = id;
          break;
        }
        u -= q;
      }
      ++count[pick];
    }
    return step(RoundInput(count.begin(), count.end()));
  }

 private:
  ElementState& element(ElementId id) {
    auto it = elements_.find(id);
    if (it == elements_.end()) {
      const std::uint64_t stream = splitmix64(static_cast<std::uint64_t>(id));
      it = elements_.emplace(id, ElementState{SeedProcess(model_->win.params, make_stream(seed_, stream)), {}, 0})
               .first;
    }
    return it->second;
  }

  std::shared_ptr<const OCSModel> model_;
  std::uint64_t seed_;
  Rng rng_;
  std::unordered_map<ElementId, ElementState> elements_;
};

}  // namespace mocs
