// Batch kernels with an OpenMP version and a serial reference that must
// agree with it exactly.
#pragma once

#include <vector>

#include "mlab/evaluate.hpp"

namespace mlab {

// Runs l on every stream and judges the trajectory.
std::vector<StreamRecord> judge_streams(const Table& t, const Learner& l, const EvalConfig& cfg,
                                        const std::vector<Stream>& streams);
std::vector<StreamRecord> judge_streams_serial(const Table& t, const Learner& l, const EvalConfig& cfg,
                                               const std::vector<Stream>& streams);

// max_j deficiency(e, x↾j) for every index in `indices`.
std::vector<Ext> max_deficiencies(const Table& t, const Estimator& est, const std::vector<Index>& indices,
                                  const BitString& x);
std::vector<Ext> max_deficiencies_serial(const Table& t, const Estimator& est, const std::vector<Index>& indices,
                                         const BitString& x);

// Worker threads the parallel kernels use.
int kernel_threads();

}  // namespace mlab
