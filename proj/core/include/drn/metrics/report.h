#ifndef DRN_METRICS_REPORT_H_
#define DRN_METRICS_REPORT_H_

#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace drn::metrics {

struct MetricRow {
  std::string id;
  double si_sdr_db = 0.0;
  double snr_db = 0.0;
  double mix_si_sdr_db = 0.0;  // unprocessed mic 0 against the same target
  double mix_snr_db = 0.0;
  double loss = 0.0;
  std::string error;  // non-empty rows are excluded from aggregates

  bool ok() const { return error.empty(); }
  double delta_si_sdr_db() const { return si_sdr_db - mix_si_sdr_db; }
  double delta_snr_db() const { return snr_db - mix_snr_db; }
};

struct Aggregate {
  double mean = 0.0;
  double ci95 = 0.0;  // normal-approximation half-width
  int count = 0;
};

// Mean and 1.96 * sample std / sqrt(n).
Aggregate Summarize(const std::vector<double>& values);

class MetricReport {
 public:
  MetricReport() = default;

  void Add(MetricRow row) { rows_.push_back(std::move(row)); }
  void SetTag(const std::string& key, const std::string& value) {
    tags_[key] = value;
  }

  const std::vector<MetricRow>& rows() const { return rows_; }
  const std::map<std::string, std::string>& tags() const { return tags_; }
  int failed() const;

  // Aggregates over successful rows. Keys: si_sdr_db, snr_db, mix_si_sdr_db,
  // mix_snr_db, delta_si_sdr_db, delta_snr_db, loss.
  std::map<std::string, Aggregate> Aggregates() const;
  Aggregate Get(const std::string& key) const;

  std::string ToCsv() const;
  nlohmann::json ToJson() const;
  void WriteCsv(const std::string& path) const;
  void WriteJson(const std::string& path) const;

 private:
  std::vector<MetricRow> rows_;
  std::map<std::string, std::string> tags_;
};

// Fixed-precision formatting used by every CSV writer.
std::string FormatNumber(double v);

}  // namespace drn::metrics

#endif  // DRN_METRICS_REPORT_H_
