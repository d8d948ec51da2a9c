#ifndef MTM_CSV_HPP
#define MTM_CSV_HPP

#include <string>

#include "mtm/experiments.hpp"
#include "mtm/samplers.hpp"

namespace mtm {

// Numbers are written with 17 significant digits so CSV round-trips are
// exact for doubles.
std::string format_g17(double v);

// Columns: iteration,x1..xd,n_used,alpha,accepted. Row 0 is the start
// state with the per-iteration fields left empty.
std::string trace_to_csv(const ChainTrace& trace);

// Columns: scheme,sigma,n_tilde,runs,mean_tau,tau_se,mse,mse_se; one row
// per grid cell, mse fields empty for fixed-start cells.
std::string summary_to_csv(const ExperimentSummary& summary);

}  // namespace mtm

#endif  // MTM_CSV_HPP
