#pragma once

// Column formats for the CLI outputs.  Floats are printed with 17 significant
// digits (round-trip exact for IEEE doubles) so runs can be diffed bit-wise.

#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "curved/harness.hpp"
#include "curved/kendall.hpp"
#include "curved/sde.hpp"

namespace curved::io {

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

// Plain strategy path:  t,R,A,phase  (phase = strategy name, constant).
inline void write_path_csv(std::ostream& os,
                           const std::vector<sde::ReducedState>& path,
                           const std::string& label) {
  os << "t,R,A,phase\n";
  for (const auto& s : path) {
    os << fmt17(s.t) << ',' << fmt17(s.R) << ',' << fmt17(s.A) << ',' << label
       << '\n';
  }
}

// Controller trace:  t,R,A,W,phase,switch_count.
inline void write_phase_trace_csv(std::ostream& os,
                                  const std::vector<kendall::PathSample>& trace) {
  os << "t,R,A,W,phase,switch_count\n";
  for (const auto& p : trace) {
    os << fmt17(p.t) << ',' << fmt17(p.R) << ',' << fmt17(p.A) << ','
       << fmt17(p.W) << ',' << kendall::phase_name(p.phase) << ','
       << p.switch_count << '\n';
  }
}

// Batch records:  trial,outcome,tau,switches,final_R,final_A.
inline void write_records_csv(std::ostream& os,
                              const std::vector<kendall::StoppingRecord>& records) {
  os << "trial,outcome,tau,switches,final_R,final_A\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    os << i << ',' << kendall::outcome_name(r.outcome) << ',' << fmt17(r.tau)
       << ',' << r.phase_switch_count << ',' << fmt17(r.final_R) << ','
       << fmt17(r.final_A) << '\n';
  }
}

// Survival curve:  t,p_hat,ci.
inline void write_survival_csv(std::ostream& os, const harness::SurvivalCurve& c) {
  os << "t,p_hat,ci\n";
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    os << fmt17(c.grid[i]) << ',' << fmt17(c.p_hat[i]) << ','
       << fmt17(c.ci_half_width[i]) << '\n';
  }
}

}  // namespace curved::io
