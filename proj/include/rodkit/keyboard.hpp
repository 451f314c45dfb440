#pragma once

#include <string>
#include <vector>

#include "rodkit/discovery.hpp"

namespace rod {

/// q of base option i under base reward j, over primitives plus a zero-valued
/// terminate column.
struct QCube {
  int n_base = 0;
  std::vector<Matrix> values;  // index i * n_base + j

  const Matrix& at(int i, int j) const { return values[static_cast<std::size_t>(i * n_base + j)]; }
  int num_states() const { return values.empty() ? 0 : static_cast<int>(values.front().rows()); }
  int num_primitive() const { return values.empty() ? 0 : static_cast<int>(values.front().cols()) - 1; }
};

/// q of the option's policy under reward_sa: one step of reward, then follow
/// the option until it terminates (value zero from there). Last column is the
/// terminate action.
Matrix evaluate_option(const TabularMDP& mdp, const OptionDef& option, const Matrix& reward_sa, double gamma);

QCube evaluate_base_options(const std::vector<OptionDef>& options, const std::vector<Eigenpurpose>& rewards,
                            const TabularMDP& mdp, double gamma);

/// Per-base q tables under r^c = sum_j w_j r_j.
std::vector<Matrix> gpe(const QCube& cube, const std::vector<double>& w);

struct SynthOption {
  OptionDef option;
  std::vector<double> weights;
  std::vector<int> key;     // sorted terminal states
  bool degenerate = false;  // terminates everywhere
};

/// GPI over base options with the terminate action included; terminate wins ties.
SynthOption gpi_synthesize(const QCube& cube, const std::vector<double>& w);

struct KeyboardEnumeration {
  std::vector<SynthOption> unique;     // first occurrence in lexicographic weight order
  std::vector<int> unique_by_prefix;   // entry m-1: unique options using only the first m bases
  std::vector<std::vector<double>> all_weights;
  std::vector<std::vector<int>> all_keys;
  int degenerate = 0;  // weight vectors giving an everywhere-terminal option
};

/// Every non-zero weight vector over the alphabet, deduplicated by terminal set.
/// Everywhere-terminal composites are flagged and left out of the unique set.
KeyboardEnumeration enumerate_keyboard(const QCube& cube, const std::vector<double>& alphabet, int jobs = 1);

inline constexpr int kMaxKeyboardBases = 14;

}  // namespace rod
