#include "evkit/parallel.hpp"

#include <omp.h>

#include "evkit/errors.hpp"

namespace evkit {

namespace {

// Shares on date t; the group sums are accumulated in security order so both
// kernels produce the same bits.
std::array<double, 4> shares_on(const PanelDataset& panel, std::size_t t) {
  std::array<double, 4> cap{0.0, 0.0, 0.0, 0.0};
  for (const auto& sec : panel.securities) {
    const auto& q = sec.quotes[t];
    if (q) cap[index(sec.group())] += q->price * q->shares_outstanding;
  }
  const double total = ((cap[0] + cap[1]) + cap[2]) + cap[3];
  if (!(total > 0.0)) {
    throw InputError("zero total capitalization on " + panel.calendar[t].to_string());
  }
  return {cap[0] / total, cap[1] / total, cap[2] / total, cap[3] / total};
}

}  // namespace

CapShareSeries serial::cap_shares(const PanelDataset& panel) {
  CapShareSeries out;
  out.dates = panel.calendar.dates();
  out.shares = serial::map_indexed(panel.calendar.size(),
                                   [&](std::size_t t) { return shares_on(panel, t); });
  return out;
}

CapShareSeries par::cap_shares(const PanelDataset& panel) {
  CapShareSeries out;
  out.dates = panel.calendar.dates();
  out.shares = par::map_indexed(panel.calendar.size(),
                                [&](std::size_t t) { return shares_on(panel, t); });
  return out;
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace evkit
