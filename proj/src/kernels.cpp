#include "mlab/kernels.hpp"

#include <omp.h>

#include <exception>

namespace mlab {

namespace {

// Runs body(i) for i < n on the OpenMP team, rethrowing the first exception.
template <class F>
void parallel_for(std::size_t n, F body) {
  std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(mlab_kernel_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
}

StreamRecord judge_one(const Table& t, const Learner& l, const EvalConfig& cfg, const Stream& s) {
  Stream cut{s.seed, s.bits.prefix(std::min(s.bits.size(), cfg.horizon))};
  auto tr = l.trajectory(cut.bits);
  return judge_trajectory(t, cfg, cut, std::move(tr));
}

}  // namespace

int kernel_threads() { return omp_get_max_threads(); }

std::vector<StreamRecord> judge_streams(const Table& t, const Learner& l, const EvalConfig& cfg,
                                        const std::vector<Stream>& streams) {
  std::vector<StreamRecord> out(streams.size());
  parallel_for(streams.size(), [&](std::size_t i) { out[i] = judge_one(t, l, cfg, streams[i]); });
  return out;
}

std::vector<StreamRecord> judge_streams_serial(const Table& t, const Learner& l, const EvalConfig& cfg,
                                               const std::vector<Stream>& streams) {
  std::vector<StreamRecord> out;
  out.reserve(streams.size());
  for (const auto& s : streams) out.push_back(judge_one(t, l, cfg, s));
  return out;
}

std::vector<Ext> max_deficiencies(const Table& t, const Estimator& est, const std::vector<Index>& indices,
                                  const BitString& x) {
  std::vector<Ext> out(indices.size());
  parallel_for(indices.size(), [&](std::size_t i) { out[i] = max_deficiency(t, est, indices[i], x); });
  return out;
}

std::vector<Ext> max_deficiencies_serial(const Table& t, const Estimator& est, const std::vector<Index>& indices,
                                         const BitString& x) {
  std::vector<Ext> out;
  out.reserve(indices.size());
  for (Index e : indices) out.push_back(max_deficiency(t, est, e, x));
  return out;
}

}  // namespace mlab
