#pragma once

#include <cstddef>
#include <exception>
#include <optional>
#include <type_traits>
#include <utility>
#include <vector>

#include "evkit/data_model.hpp"
#include "evkit/index_engine.hpp"

// Data-parallel kernels. Every `par::` kernel has a `serial::` twin with the
// same contract; results never depend on thread count or schedule because each
// job writes only its own slot and seeds are keyed by job index.

namespace evkit {

namespace detail {

template <class F>
using job_result_t = std::invoke_result_t<F&, std::size_t>;

// Re-throws the exception of the lowest failing job so error reporting is
// schedule-independent too.
template <class R>
std::vector<R> collect(std::vector<std::optional<R>>& slots, std::vector<std::exception_ptr>& errors) {
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<R> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace detail

namespace serial {

template <class F>
std::vector<detail::job_result_t<F>> map_indexed(std::size_t n, F&& f) {
  std::vector<detail::job_result_t<F>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(f(i));
  return out;
}

CapShareSeries cap_shares(const PanelDataset& panel);

}  // namespace serial

namespace par {

template <class F>
std::vector<detail::job_result_t<F>> map_indexed(std::size_t n, F&& f) {
  using R = detail::job_result_t<F>;
  std::vector<std::optional<R>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i) {
    try {
      slots[i].emplace(f(static_cast<std::size_t>(i)));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  return detail::collect(slots, errors);
}

CapShareSeries cap_shares(const PanelDataset& panel);

}  // namespace par

int max_threads();

}  // namespace evkit
