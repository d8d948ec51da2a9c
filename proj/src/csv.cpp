#include "mtm/csv.hpp"

#include <cstdio>

namespace mtm {

std::string format_g17(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trace_to_csv(const ChainTrace& trace)
{
    const std::size_t dim = trace.states.front().size();
    std::string out = "iteration";
    for (std::size_t i = 1; i <= dim; ++i) out += ",x" + std::to_string(i);
    out += ",n_used,alpha,accepted\n";

    for (std::size_t t = 0; t < trace.states.size(); ++t) {
        out += std::to_string(t);
        for (double c : trace.states[t]) out += "," + format_g17(c);
        if (t == 0) {
            out += ",,,\n";
            continue;
        }
        const IterationRecord& rec = trace.records[t - 1];
        out += "," + std::to_string(rec.n_used);
        out += "," + format_g17(rec.alpha);
        out += rec.accepted ? ",1\n" : ",0\n";
    }
    return out;
}

std::string summary_to_csv(const ExperimentSummary& summary)
{
    std::string out = "scheme,sigma,n_tilde,runs,mean_tau,tau_se,mse,mse_se\n";
    for (const CellSummary& cell : summary.cells) {
        out += scheme_name(cell.scheme);
        out += "," + format_g17(cell.sigma);
        out += "," + std::to_string(cell.n_tilde);
        out += "," + std::to_string(cell.runs_completed);
        out += "," + format_g17(cell.mean_tau);
        out += "," + format_g17(cell.tau_std_error);
        out += ",";
        if (cell.mse) out += format_g17(*cell.mse);
        out += ",";
        if (cell.mse_std_error) out += format_g17(*cell.mse_std_error);
        out += "\n";
    }
    return out;
}

}  // namespace mtm
