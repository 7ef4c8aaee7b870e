#include "multicoap/selection.hpp"

#include <numeric>

#include "multicoap/error.hpp"
#include "multicoap/vem.hpp"

namespace multicoap {

int cup_cut(std::span<const double> nu, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
  const double total = std::accumulate(nu.begin(), nu.end(), 0.0);
  if (!(total > 0.0)) {
    throw NumericalError(NumericalErrorKind::DegenerateSpectrum, "CUP criterion: all factor energies are zero");
  }
  double acc = 0.0;
  for (std::size_t k = 0; k < nu.size(); ++k) {
    acc += nu[k];
    if (acc / total > tau) return static_cast<int>(k + 1);
  }
  return static_cast<int>(nu.size());
}

Vector column_energies(const Matrix& L) { return L.colwise().squaredNorm().transpose(); }

FactorSelection select_factors_from_fit(const FitResult& fit, double tau) {
  FactorSelection out;
  out.tau = tau;
  out.nu_f = column_energies(fit.params.A);
  out.q_hat = cup_cut(std::span<const double>(out.nu_f.data(), static_cast<std::size_t>(out.nu_f.size())), tau);
  for (const Matrix& B : fit.params.B) {
    Vector nu = column_energies(B);
    out.qs_hat.push_back(
        nu.size() == 0 ? 0 : cup_cut(std::span<const double>(nu.data(), static_cast<std::size_t>(nu.size())), tau));
    out.nu_h.push_back(std::move(nu));
  }
  return out;
}

FactorSelection select_factors(const MultiStudyDataset& data, int q_max, const std::vector<int>& qs_max,
                               double tau, const FitConfig& base) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
  FitConfig config = base;
  config.q = q_max;
  config.qs = qs_max;
  return select_factors_from_fit(fit(data, config), tau);
}

}  // namespace multicoap
