#pragma once

#include "fracsob/experiment.hpp"

namespace fracsob::detail {

void run_whitney_audit(const ExperimentConfig& config, ResultBundle& bundle);
void run_extension_bound(const ExperimentConfig& config, ResultBundle& bundle);
void run_hardy_sweep(const ExperimentConfig& config, ResultBundle& bundle);
void run_interpolation_equivalence(const ExperimentConfig& config, ResultBundle& bundle);
void run_elliptic_suite(const ExperimentConfig& config, ResultBundle& bundle);
void run_cigar_check(const ExperimentConfig& config, ResultBundle& bundle);

}  // namespace fracsob::detail
