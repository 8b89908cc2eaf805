#include "mcdist/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace mcdist {

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

double parse_double(const std::string& field, long line) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError("cannot parse number '" + field + "'", line);
  return value;
}

long parse_long(const std::string& field, long line) {
  long value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end)
    throw ParseError("cannot parse integer '" + field + "'", line);
  return value;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

class CsvReader {
public:
  explicit CsvReader(const std::filesystem::path& path) : path_(path), in_(path) {
    if (!in_) throw ConfigError("cannot open " + path.string());
  }

  // Returns false at end of file; skips blank lines.
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      fields = split_csv_line(line);
      return true;
    }
    return false;
  }

  void expect_header(const std::string& header) {
    std::vector<std::string> fields;
    if (!next(fields))
      throw ParseError("missing header in " + path_.string(), 1);
    std::string joined;
    for (std::size_t i = 0; i < fields.size(); ++i)
      joined += (i ? "," : "") + fields[i];
    if (joined != header)
      throw ParseError("unexpected header '" + joined + "' in " + path_.string(), line_);
  }

  long line() const { return line_; }

private:
  std::filesystem::path path_;
  std::ifstream in_;
  long line_ = 0;
};

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

std::string trial_id_for(double distance, double emission_time, int replication) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "d%03d_te%.2f_r%02d", static_cast<int>(std::lround(distance)),
                emission_time, replication);
  return buf;
}

constexpr const char* kSignalsHeader = "trial_id,sample_index,time_s,voltage_v";
constexpr const char* kLabelsHeader = "trial_id,distance_cm,emission_time_s";
constexpr const char* kFeaturesHeader =
    "trial_id,t_low_s,c_low_v,r_s,delta_c_v,g_v_per_s,t_peak_s,c_peak_v,e_r_v2,"
    "emission_time_s,distance_cm";
constexpr const char* kParamsHeader = "model_name,emission_time_s,a,b,rmse";

}  // namespace

Dataset generate_design(const std::vector<double>& distances,
                        const std::vector<double>& emission_times, int replications,
                        const ChannelParams& channel, const SensorConfig& sensor,
                        ChannelModel model, std::uint64_t seed) {
  if (distances.empty() || emission_times.empty() || replications < 1)
    throw ConfigError("generate_design requires nonempty grids and replications >= 1");

  Dataset out;
  out.design = {distances, emission_times, replications};
  std::uint64_t index = 0;
  for (double d : distances)
    for (double te : emission_times)
      for (int rep = 0; rep < replications; ++rep) {
        SampledSignal sig =
            simulate_received_signal(channel, sensor, model, d, te, trial_seed(seed, index));
        sig.trial_id = trial_id_for(d, te, rep);
        out.trials.push_back(std::move(sig));
        ++index;
      }
  std::sort(out.trials.begin(), out.trials.end(),
            [](const SampledSignal& a, const SampledSignal& b) { return a.trial_id < b.trial_id; });
  return out;
}

void save_signals_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << kSignalsHeader << '\n';
  for (const SampledSignal& sig : dataset.trials)
    for (Eigen::Index n = 0; n < sig.size(); ++n)
      out << sig.trial_id << ',' << n << ',' << format_double(sig.time_at(n)) << ','
          << format_double(sig.samples[n]) << '\n';
}

void save_labels_csv(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << kLabelsHeader << '\n';
  for (const SampledSignal& sig : dataset.trials)
    out << sig.trial_id << ',' << format_double(sig.distance) << ','
        << format_double(sig.emission_time) << '\n';
}

Dataset load_dataset(const std::filesystem::path& signals_path,
                     const std::filesystem::path& labels_path) {
  struct Label {
    double distance, emission_time;
  };
  std::map<std::string, Label> labels;
  {
    CsvReader reader(labels_path);
    reader.expect_header(kLabelsHeader);
    std::vector<std::string> f;
    while (reader.next(f)) {
      if (f.size() != 3)
        throw ParseError("expected 3 columns in labels file", reader.line());
      labels[f[0]] = {parse_double(f[1], reader.line()), parse_double(f[2], reader.line())};
    }
  }

  struct Raw {
    std::vector<double> times, volts;
  };
  std::map<std::string, Raw> raw;
  {
    CsvReader reader(signals_path);
    reader.expect_header(kSignalsHeader);
    std::vector<std::string> f;
    while (reader.next(f)) {
      if (f.size() != 4)
        throw ParseError("expected 4 columns in signals file", reader.line());
      Raw& r = raw[f[0]];
      const long index = parse_long(f[1], reader.line());
      if (index != static_cast<long>(r.times.size()))
        throw ParseError("sample_index out of order for trial " + f[0], reader.line());
      r.times.push_back(parse_double(f[2], reader.line()));
      r.volts.push_back(parse_double(f[3], reader.line()));
    }
  }
  if (raw.empty()) throw ParseError("signals file has no data rows", 1);

  Dataset out;
  for (auto& [id, r] : raw) {
    const auto label = labels.find(id);
    if (label == labels.end()) throw MissingLabel("no label row for trial " + id);
    if (r.times.size() < 2) throw InsufficientData("trial " + id + " has fewer than 2 samples");

    SampledSignal sig;
    sig.trial_id = id;
    sig.t0 = r.times.front();
    sig.dt = r.times[1] - r.times[0];
    if (sig.dt <= 0.0) throw NonUniformSampling("nonpositive dt in trial " + id);
    for (std::size_t n = 1; n < r.times.size(); ++n)
      if (std::abs(r.times[n] - r.times[n - 1] - sig.dt) > 1e-9)
        throw NonUniformSampling("trial " + id + " is not uniformly sampled at sample " +
                                 std::to_string(n));
    sig.samples = Eigen::Map<const Eigen::VectorXd>(r.volts.data(),
                                                    static_cast<Eigen::Index>(r.volts.size()));
    sig.distance = label->second.distance;
    sig.emission_time = label->second.emission_time;
    out.trials.push_back(std::move(sig));
  }
  return out;
}

void save_features_csv(const std::vector<FeatureRecord>& records,
                       const std::filesystem::path& path) {
  std::vector<const FeatureRecord*> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* a, const auto* b) { return a->trial_id < b->trial_id; });

  std::ofstream out = open_out(path);
  out << kFeaturesHeader << '\n';
  for (const FeatureRecord* r : sorted) {
    const FeatureVector& f = r->features;
    out << r->trial_id;
    for (double v : {f.t_low, f.c_low, f.rise_time, f.delta_c, f.gradient, f.t_peak, f.c_peak,
                     f.received_energy, f.emission_time, r->distance})
      out << ',' << format_double(v);
    out << '\n';
  }
}

std::vector<FeatureRecord> load_features_csv(const std::filesystem::path& path) {
  CsvReader reader(path);
  reader.expect_header(kFeaturesHeader);
  std::vector<FeatureRecord> out;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() != 11)
      throw ParseError("expected 11 columns in features file", reader.line());
    FeatureRecord rec;
    rec.trial_id = f[0];
    FeatureVector& v = rec.features;
    v.t_low = parse_double(f[1], reader.line());
    v.c_low = parse_double(f[2], reader.line());
    v.rise_time = parse_double(f[3], reader.line());
    v.delta_c = parse_double(f[4], reader.line());
    v.gradient = parse_double(f[5], reader.line());
    v.t_peak = parse_double(f[6], reader.line());
    v.c_peak = parse_double(f[7], reader.line());
    v.received_energy = parse_double(f[8], reader.line());
    v.emission_time = parse_double(f[9], reader.line());
    rec.distance = parse_double(f[10], reader.line());
    out.push_back(std::move(rec));
  }
  return out;
}

void save_curve_params_csv(const CurveFitSummary& fit, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << kParamsHeader << '\n';
  for (std::size_t i = 0; i < fit.params.rows.size(); ++i) {
    const CurveRow& row = fit.params.rows[i];
    out << "power," << format_double(row.emission_time) << ','
        << format_double(row.power_amplitude) << ',' << format_double(row.power_rate) << ','
        << format_double(i < fit.power_rmse.size() ? fit.power_rmse[i] : 0.0) << '\n';
    out << "peaktime," << format_double(row.emission_time) << ','
        << format_double(row.peaktime_amplitude) << ',' << format_double(row.peaktime_rate)
        << ',' << format_double(i < fit.peaktime_rmse.size() ? fit.peaktime_rmse[i] : 0.0)
        << '\n';
    out << "transmit_power," << format_double(row.emission_time) << ','
        << format_double(row.transmit_power) << ",0,0\n";
  }
}

CurveEstimatorParams load_curve_params_csv(const std::filesystem::path& path) {
  CsvReader reader(path);
  reader.expect_header(kParamsHeader);
  std::map<double, CurveRow> rows;
  std::vector<std::string> f;
  while (reader.next(f)) {
    if (f.size() != 5)
      throw ParseError("expected 5 columns in curve parameters file", reader.line());
    const double te = parse_double(f[1], reader.line());
    CurveRow& row = rows[te];
    row.emission_time = te;
    const double a = parse_double(f[2], reader.line());
    const double b = parse_double(f[3], reader.line());
    if (f[0] == "power") {
      row.power_amplitude = a;
      row.power_rate = b;
    } else if (f[0] == "peaktime") {
      row.peaktime_amplitude = a;
      row.peaktime_rate = b;
    } else if (f[0] == "transmit_power") {
      row.transmit_power = a;
    } else {
      throw ParseError("unknown model_name '" + f[0] + "'", reader.line());
    }
  }
  CurveEstimatorParams out;
  for (auto& [te, row] : rows) out.rows.push_back(row);
  return out;
}

void save_predictions_csv(const std::vector<EstimateRecord>& estimates,
                          const std::string& method, const std::filesystem::path& path) {
  std::vector<const EstimateRecord*> sorted;
  for (const auto& e : estimates) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(),
            [](const auto* a, const auto* b) { return a->trial_id < b->trial_id; });
  std::ofstream out = open_out(path);
  out << "trial_id,method,distance_cm,estimate_cm\n";
  for (const EstimateRecord* e : sorted)
    out << e->trial_id << ',' << method << ',' << format_double(e->actual) << ','
        << format_double(e->estimate) << '\n';
}

void save_report_csv(const EvaluationReport& report, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "method,distance_cm,count,mean_cm,std_cm,mape_pct\n";
  for (const DistanceStats& s : report.per_distance)
    out << report.method << ',' << format_double(s.distance) << ',' << s.count << ','
        << format_double(s.mean) << ',' << format_double(s.stddev) << ','
        << format_double(s.mape) << '\n';
}

void save_summary_csv(const EvaluationReport& report, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "method,rmse_cm,trials,excluded,seed\n";
  out << report.method << ',' << format_double(report.rmse) << ',' << report.trials << ','
      << report.excluded << ',' << report.seed << '\n';
}

void save_velocity_csv(const std::vector<VelocityRow>& rows, const std::filesystem::path& path) {
  std::ofstream out = open_out(path);
  out << "distance_cm,emission_time_s,mean_velocity_cm_s,count\n";
  for (const VelocityRow& r : rows)
    out << format_double(r.distance) << ',' << format_double(r.emission_time) << ','
        << format_double(r.mean_velocity) << ',' << r.count << '\n';
}

}  // namespace mcdist
