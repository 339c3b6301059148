#include "s2r/reports.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "s2r/errors.hpp"
#include "s2r/io.hpp"

namespace s2r {
namespace {

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

double to_double(const std::string& s) {
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw ConfigError("malformed number '" + s + "'");
  return v;
}

std::string fmt_or_empty(double v) { return std::isnan(v) ? std::string() : format_double(v); }

constexpr std::string_view kReportHeader =
    "target_index,tx,ty,tz,return,final_distance_m,termination_cause,env_kind,strategy,sequence,seed,config_hash";

}  // namespace

std::string report_to_csv(const EvalReport& report) {
  std::ostringstream out;
  out << kReportHeader << '\n';
  for (const auto& e : report.episodes) {
    out << e.target_index << ',' << format_double(e.target.x()) << ',' << format_double(e.target.y())
        << ',' << format_double(e.target.z()) << ',' << format_double(e.episode_return) << ','
        << format_double(e.final_distance) << ',' << to_string(e.cause) << ','
        << to_string(report.env_kind) << ',' << report.strategy << ',' << report.sequence << ','
        << report.seed << ',' << report.config_hash << '\n';
  }
  return out.str();
}

EvalReport report_from_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != kReportHeader) {
    throw ConfigError("not an evaluation report: unexpected header");
  }
  EvalReport report;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv_line(lines[i]);
    if (f.size() != 12) throw ConfigError("evaluation report row " + std::to_string(i) + " has wrong arity");
    EpisodeRecord e;
    e.target_index = std::stoi(f[0]);
    e.target = {to_double(f[1]), to_double(f[2]), to_double(f[3])};
    e.episode_return = to_double(f[4]);
    e.final_distance = to_double(f[5]);
    e.cause = parse_termination_cause(f[6]);
    report.env_kind = parse_env_kind(f[7]);
    report.strategy = f[8];
    report.sequence = f[9];
    report.seed = std::stoull(f[10]);
    report.config_hash = f[11];
    report.episodes.push_back(e);
  }
  return report;
}

std::string curve_to_csv(const std::vector<CurvePoint>& curve) {
  std::ostringstream out;
  out << "timesteps,mean_return\n";
  for (const auto& p : curve) out << p.timesteps << ',' << format_double(p.mean_return) << '\n';
  return out.str();
}

std::vector<CurvePoint> read_curve_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front().rfind("timesteps,mean_return", 0) != 0) {
    throw ConfigError("not a curve file: unexpected header");
  }
  std::vector<CurvePoint> curve;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv_line(lines[i]);
    if (f.size() < 2) throw ConfigError("curve row has wrong arity");
    curve.push_back({std::stoll(f[0]), to_double(f[1])});
  }
  return curve;
}

constexpr std::string_view kTaggedCurveHeader = "timesteps,mean_return,strategy,sequence,seed,config_hash";

std::string tagged_curve_to_csv(const TaggedCurve& curve) {
  std::ostringstream out;
  out << kTaggedCurveHeader << '\n';
  const auto& t = curve.tag;
  for (const auto& p : curve.points) {
    out << p.timesteps << ',' << format_double(p.mean_return) << ',' << t.strategy << ','
        << t.sequence << ',' << t.seed << ',' << t.config_hash << '\n';
  }
  return out.str();
}

TaggedCurve read_tagged_curve_csv(std::string_view text) {
  const auto lines = lines_of(text);
  if (lines.empty() || lines.front() != kTaggedCurveHeader) {
    throw ConfigError("not a tagged curve file: unexpected header");
  }
  TaggedCurve curve;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_csv_line(lines[i]);
    if (f.size() != 6) throw ConfigError("curve row " + std::to_string(i) + " has wrong arity");
    curve.points.push_back({std::stoll(f[0]), to_double(f[1])});
    ArtifactTag tag{f[2], f[3], std::stoull(f[4]), f[5]};
    if (i > 1 && !(tag == curve.tag)) throw ConfigError("curve file mixes runs");
    curve.tag = std::move(tag);
  }
  return curve;
}

std::string summary_to_csv(const std::vector<SummaryRow>& rows, std::string_view config_hash) {
  const bool tagged = !config_hash.empty();
  std::ostringstream out;
  out << "strategy,sequence,avg_sim,std_sim,best_sim,best_pseudo_real,gap,pct_joint_limit"
      << (tagged ? ",config_hash\n" : "\n");
  for (const auto& r : rows) {
    out << r.strategy << ',' << r.sequence << ',' << fmt_or_empty(r.avg_sim) << ','
        << fmt_or_empty(r.std_sim) << ',' << fmt_or_empty(r.best_sim) << ','
        << fmt_or_empty(r.best_pseudo_real) << ',' << fmt_or_empty(r.gap) << ','
        << format_double(r.pct_joint_limit);
    if (tagged) out << ',' << config_hash;
    out << '\n';
  }
  return out.str();
}

std::string progress_header() {
  return "update_index,timesteps,episodes,mean_return,policy_loss,value_loss,entropy,clip_fraction,"
         "termination_counts\n";
}

std::string progress_row(const UpdateRecord& r) {
  std::ostringstream out;
  const auto& c = r.termination_counts;
  out << r.update_index << ',' << r.timesteps << ',' << r.episodes << ','
      << (r.episodes > 0 ? format_double(r.mean_return) : std::string()) << ','
      << format_double(r.losses.policy_loss) << ',' << format_double(r.losses.value_loss) << ','
      << format_double(r.losses.entropy) << ',' << format_double(r.losses.clip_fraction) << ','
      << "floor_collision:" << c[static_cast<int>(TerminationCause::floor_collision)]
      << ";joint_limit:" << c[static_cast<int>(TerminationCause::joint_limit)]
      << ";horizon:" << c[static_cast<int>(TerminationCause::horizon)] << '\n';
  return out.str();
}

std::vector<CurvePoint> mean_curve(const std::vector<std::vector<CurvePoint>>& curves) {
  std::map<long long, std::pair<double, int>> acc;
  for (const auto& c : curves) {
    for (const auto& p : c) {
      auto& [sum, n] = acc[p.timesteps];
      sum += p.mean_return;
      ++n;
    }
  }
  std::vector<CurvePoint> out;
  for (const auto& [t, v] : acc) out.push_back({t, v.first / v.second});
  return out;
}

std::string curve_plot_svg(const std::vector<CurveSeries>& series, double x_tick_spacing,
                           std::string_view title, std::optional<double> baseline,
                           std::string_view config_hash) {
  constexpr double width = 720, height = 420, left = 80, right = 170, top = 40, bottom = 50;
  double x_max = x_tick_spacing;
  double y_min = 0.0, y_max = 0.0;
  bool first = true;
  auto include_y = [&](double y) {
    if (first) {
      y_min = y_max = y;
      first = false;
    }
    y_min = std::min(y_min, y);
    y_max = std::max(y_max, y);
  };
  for (const auto& s : series) {
    for (const auto& p : s.points) {
      x_max = std::max(x_max, static_cast<double>(p.timesteps));
      include_y(p.mean_return);
    }
  }
  if (baseline) include_y(*baseline);
  if (first) y_min = -1.0, y_max = 0.0;
  if (y_max - y_min < 1e-9) y_min -= 1.0, y_max += 1.0;
  const double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;
  x_max = std::ceil(x_max / x_tick_spacing) * x_tick_spacing;

  const double pw = width - left - right, ph = height - top - bottom;
  auto sx = [&](double x) { return left + pw * x / x_max; };
  auto sy = [&](double y) { return top + ph * (y_max - y) / (y_max - y_min); };
  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#ff7f0e", "#9467bd",
                                            "#8c564b", "#e377c2", "#7f7f7f", "#17becf"};

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" data-x-tick-spacing=\"" << format_double(x_tick_spacing) << "\" data-x-max=\""
      << format_double(x_max) << '"';
  if (!config_hash.empty()) svg << " data-config-hash=\"" << config_hash << '"';
  svg << ">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << left << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\">" << title
      << "</text>\n";
  svg << "<g class=\"x-ticks\" font-family=\"sans-serif\" font-size=\"10\">\n";
  const auto n_ticks = static_cast<long long>(std::llround(x_max / x_tick_spacing));
  const long long label_every = std::max<long long>(1, n_ticks / 10);
  for (long long k = 0; k <= n_ticks; ++k) {
    const double x = static_cast<double>(k) * x_tick_spacing;
    svg << "<line x1=\"" << sx(x) << "\" x2=\"" << sx(x) << "\" y1=\"" << top + ph << "\" y2=\""
        << top + ph + 5 << "\" stroke=\"black\" data-x=\"" << format_double(x) << "\"/>\n";
    if (k % label_every == 0) {
      svg << "<text x=\"" << sx(x) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
          << format_double(x) << "</text>\n";
    }
  }
  svg << "</g>\n";
  svg << "<g class=\"y-ticks\" font-family=\"sans-serif\" font-size=\"10\">\n";
  for (int k = 0; k <= 5; ++k) {
    const double y = y_min + (y_max - y_min) * k / 5.0;
    svg << "<line x1=\"" << left - 5 << "\" x2=\"" << left + pw << "\" y1=\"" << sy(y) << "\" y2=\""
        << sy(y) << "\" stroke=\"#dddddd\"/>\n";
    svg << "<text x=\"" << left - 8 << "\" y=\"" << sy(y) + 3 << "\" text-anchor=\"end\">"
        << format_double(std::round(y * 100.0) / 100.0) << "</text>\n";
  }
  svg << "</g>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">timesteps</text>\n";
  if (baseline) {
    svg << "<line class=\"baseline\" x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\""
        << sy(*baseline) << "\" y2=\"" << sy(*baseline)
        << "\" stroke=\"#2ca02c\" stroke-dasharray=\"6 4\"/>\n";
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kColors[i % std::size(kColors)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" data-label=\""
        << series[i].label << "\" points=\"";
    for (const auto& p : series[i].points) {
      svg << sx(static_cast<double>(p.timesteps)) << ',' << sy(p.mean_return) << ' ';
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << left + pw + 10 << "\" y=\"" << top + 15 + 16 * static_cast<double>(i)
        << "\" fill=\"" << color << "\" font-family=\"sans-serif\" font-size=\"12\">"
        << series[i].label << "</text>\n";
  }
  if (baseline) {
    svg << "<text x=\"" << left + pw + 10 << "\" y=\"" << top + 15 + 16 * static_cast<double>(series.size())
        << "\" fill=\"#2ca02c\" font-family=\"sans-serif\" font-size=\"12\">IK baseline</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace s2r
