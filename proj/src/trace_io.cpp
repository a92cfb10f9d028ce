#include "blowup/trace_io.hpp"

#include <fstream>

#include "blowup/errors.hpp"
#include "blowup/report.hpp"

namespace blowup {

void write_trace_csv(const std::string& path, const SolutionTrace& trace) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParameterError("cannot write " + path);
    const double p = trace.params().p;
    f << "eta,w,wp,V\n";
    std::string line;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const double w = trace.ws()[i], wp = trace.wps()[i];
        line = format_number(trace.etas()[i]);
        line += ',';
        line += format_number(w);
        line += ',';
        line += format_number(wp);
        line += ',';
        line += format_number(eval_V(w, wp, p));
        line += '\n';
        f << line;
    }
    if (!f) throw ParameterError("write failed: " + path);
}

nlohmann::json trace_metadata(const SolutionTrace& trace, const IntegratorOptions& opts) {
    return {{"params", params_json(trace.params())},
            {"method_tag", to_string(trace.method())},
            {"tolerances",
             {{"rel_tol", trace.params().rel_tol},
              {"abs_tol", trace.params().abs_tol},
              {"resolution_floor", opts.resolution_floor},
              {"max_steps", opts.max_steps}}},
            {"window_mode", to_string(opts.window_mode)},
            {"samples", trace.size()},
            {"zeros", trace.zeros().size()},
            {"resolved_until", trace.resolved_until()},
            {"tail_energy", trace.tail_energy()},
            {"tail_w_bound", trace.tail_w_bound()},
            {"tail_wp_bound", trace.tail_wp_bound()},
            {"version", kVersion}};
}

}  // namespace blowup
