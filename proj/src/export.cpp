#include "fedsel/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fedsel/error.hpp"

namespace fedsel {

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  return os;
}

void close_out(std::ofstream& os, const std::string& path) {
  os.flush();
  if (!os) throw IoError("write failed: " + path);
}

std::string join_ids(std::span<const ClientId> ids) {
  std::string s;
  for (ClientId c : ids) {
    if (!s.empty()) s += ' ';
    s += std::to_string(c);
  }
  return s;
}

}  // namespace

void write_trace_csv(const EpisodeTrace& trace, const Scenario& scenario, const std::string& path) {
  auto os = open_out(path);
  os << "slot,arm,members,reward,regret,theorem_bound,accuracy\n";
  for (const SlotRecord& r : trace.slots) {
    os << r.slot << ',' << (r.arm ? std::to_string(*r.arm) : "") << ',' << join_ids(r.selected) << ','
       << format_number(r.reward) << ',' << format_number(r.regret) << ','
       << format_number(regret_bound(scenario, trace.algorithm, r.slot).value_or(NAN)) << ','
       << format_number(r.accuracy) << '\n';
  }
  close_out(os, path);
}

void write_gossip_csv(const EpisodeTrace& trace, const Scenario& scenario, const std::string& path) {
  auto os = open_out(path);
  os << "slot,selected,gossip_rounds,client,mean,pulls,belief_term,bonus,index\n";
  const double n = static_cast<double>(scenario.config.N);
  for (const SlotRecord& r : trace.slots) {
    for (ClientId c = 0; c < r.clients.size(); ++c) {
      const ClientBanditState& s = r.clients[c];
      const double belief_term = s.belief / n;
      const bool indexed = r.slot >= 2;
      os << r.slot << ',' << join_ids(r.selected) << ',' << r.gossip_rounds << ',' << c << ','
         << format_number(s.mean) << ',' << s.pulls << ',' << format_number(belief_term) << ','
         << (indexed ? format_number(s.index - s.mean - belief_term) : "") << ','
         << (indexed ? format_number(s.index) : "") << '\n';
    }
  }
  close_out(os, path);
}

void write_report_csv(const MetricsReport& rep, const std::string& path) {
  auto os = open_out(path);
  os << "slot,accuracy_mean,accuracy_std,reward_mean,reward_std,regret_mean,regret_std,bound\n";
  for (std::size_t i = 0; i < rep.horizon && i < rep.reward.mean.size(); ++i) {
    os << i + 1 << ',' << format_number(rep.accuracy.mean[i]) << ',' << format_number(rep.accuracy.std[i]) << ','
       << format_number(rep.reward.mean[i]) << ',' << format_number(rep.reward.std[i]) << ','
       << format_number(rep.regret.mean[i]) << ',' << format_number(rep.regret.std[i]) << ','
       << format_number(rep.bound[i]) << '\n';
  }
  close_out(os, path);
}

void write_bounds_csv(const MetricsReport& rep, std::span<const std::size_t> slots, const std::string& path) {
  auto os = open_out(path);
  os << "t,regret,theorem_bound\n";
  auto row = [&](std::size_t t) {
    os << t << ',' << format_number(rep.regret.mean[t - 1]) << ',' << format_number(rep.bound[t - 1]) << '\n';
  };
  const std::size_t len = std::min(rep.horizon, rep.regret.mean.size());
  if (slots.empty()) {
    for (std::size_t t = 1; t <= len; ++t) row(t);
  } else {
    for (std::size_t t : slots)
      if (t >= 1 && t <= len) row(t);
  }
  close_out(os, path);
}

void write_bp_diagnostics_csv(std::span<const EpisodeTrace> traces, const std::string& path) {
  auto os = open_out(path);
  os << "trial,slot,iterations,residual,converged,degenerate,lambda,lambda_scaled\n";
  for (std::size_t i = 0; i < traces.size(); ++i) {
    for (const BpSlotDiagnostics& d : traces[i].bp) {
      os << i << ',' << d.slot << ',' << d.iterations << ',' << format_number(d.residual) << ','
         << (d.converged ? 1 : 0) << ',' << (d.degenerate ? 1 : 0) << ',' << format_number(d.lambda) << ','
         << format_number(d.lambda_scaled) << '\n';
    }
  }
  close_out(os, path);
}

void write_selection_csv(const MetricsReport& rep, const std::string& path) {
  auto os = open_out(path);
  os << "client,mean_selections\n";
  for (std::size_t n = 0; n < rep.selection_counts.size(); ++n)
    os << n << ',' << format_number(rep.selection_counts[n]) << '\n';
  close_out(os, path);
}

void write_tta_csv(const MetricsReport& rep, const std::string& path) {
  auto os = open_out(path);
  os << "target,tta_of_mean,tta_mean,reached,trials,final_accuracy_mean,final_accuracy_std\n";
  if (rep.trials > 0) {
    os << format_number(rep.target_accuracy) << ',' << (rep.tta_of_mean ? std::to_string(*rep.tta_of_mean) : "")
       << ',' << format_number(rep.tta_mean) << ',' << rep.tta_reached << ',' << rep.trials << ','
       << format_number(rep.final_accuracy_mean) << ',' << format_number(rep.final_accuracy_std) << '\n';
  }
  close_out(os, path);
}

namespace {

std::string polyline(std::span<const double> y, double y_lo, double y_hi, double x0, double y0, double w, double h,
                     const char* colour) {
  std::ostringstream pts;
  const double n = static_cast<double>(std::max<std::size_t>(y.size(), 2) - 1);
  bool any = false;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (std::isnan(y[i])) continue;
    const double px = x0 + w * static_cast<double>(i) / n;
    const double py = y0 + h - h * (y[i] - y_lo) / (y_hi - y_lo);
    pts << (any ? " " : "") << format_number(std::round(px * 100.0) / 100.0) << ','
        << format_number(std::round(py * 100.0) / 100.0);
    any = true;
  }
  if (!any) return "";
  return "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"1.5\" points=\"" + pts.str() +
         "\"/>\n";
}

}  // namespace

void write_report_svg(const MetricsReport& rep, const std::string& path) {
  constexpr double W = 640, H = 400, X0 = 60, Y0 = 30, PW = 540, PH = 310;
  const bool oracle = rep.reward_mode == RewardMode::oracle;
  std::vector<std::pair<std::span<const double>, const char*>> series;
  if (oracle) {
    series.push_back({rep.regret.mean, "#1f77b4"});
    series.push_back({rep.bound, "#d62728"});
  } else {
    series.push_back({rep.accuracy.mean, "#1f77b4"});
  }
  double lo = oracle ? 0.0 : 1.0, hi = oracle ? 0.0 : 0.0;
  for (const auto& [y, colour] : series)
    for (double v : y)
      if (!std::isnan(v)) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
  if (!(hi > lo)) hi = lo + 1.0;

  auto os = open_out(path);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<rect x=\"" << X0 << "\" y=\"" << Y0 << "\" width=\"" << PW << "\" height=\"" << PH
     << "\" fill=\"none\" stroke=\"black\"/>\n";
  os << "<text x=\"" << X0 << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\">" << to_string(rep.algorithm)
     << (oracle ? ": mean regret (blue) and bound (red)" : ": mean global accuracy") << ", " << rep.trials
     << " trials</text>\n";
  os << "<text x=\"5\" y=\"" << Y0 + 10 << "\" font-family=\"sans-serif\" font-size=\"11\">" << format_number(hi)
     << "</text>\n";
  os << "<text x=\"5\" y=\"" << Y0 + PH << "\" font-family=\"sans-serif\" font-size=\"11\">" << format_number(lo)
     << "</text>\n";
  os << "<text x=\"" << X0 + PW - 40 << "\" y=\"" << Y0 + PH + 20 << "\" font-family=\"sans-serif\" font-size=\"11\">t = "
     << rep.horizon << "</text>\n";
  for (const auto& [y, colour] : series) os << polyline(y, lo, hi, X0, Y0, PW, PH, colour);
  os << "</svg>\n";
  close_out(os, path);
}

}  // namespace fedsel
