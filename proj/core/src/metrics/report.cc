#include "drn/metrics/report.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace drn::metrics {

std::string FormatNumber(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

Aggregate Summarize(const std::vector<double>& values) {
  Aggregate a;
  a.count = static_cast<int>(values.size());
  if (values.empty()) return a;
  double sum = 0.0;
  for (double v : values) sum += v;
  a.mean = sum / a.count;
  if (a.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.ci95 = 1.96 * std::sqrt(ss / (a.count - 1)) / std::sqrt(a.count);
  }
  return a;
}

int MetricReport::failed() const {
  int n = 0;
  for (const auto& r : rows_) n += !r.ok();
  return n;
}

std::map<std::string, Aggregate> MetricReport::Aggregates() const {
  std::map<std::string, std::vector<double>> cols;
  for (const auto& r : rows_) {
    if (!r.ok()) continue;
    cols["si_sdr_db"].push_back(r.si_sdr_db);
    cols["snr_db"].push_back(r.snr_db);
    cols["mix_si_sdr_db"].push_back(r.mix_si_sdr_db);
    cols["mix_snr_db"].push_back(r.mix_snr_db);
    cols["delta_si_sdr_db"].push_back(r.delta_si_sdr_db());
    cols["delta_snr_db"].push_back(r.delta_snr_db());
    cols["loss"].push_back(r.loss);
  }
  std::map<std::string, Aggregate> out;
  for (const char* key : {"si_sdr_db", "snr_db", "mix_si_sdr_db", "mix_snr_db",
                          "delta_si_sdr_db", "delta_snr_db", "loss"}) {
    out[key] = Summarize(cols[key]);
  }
  return out;
}

Aggregate MetricReport::Get(const std::string& key) const {
  auto all = Aggregates();
  auto it = all.find(key);
  if (it == all.end()) throw std::out_of_range("no aggregate " + key);
  return it->second;
}

std::string MetricReport::ToCsv() const {
  std::ostringstream out;
  out << "id,si_sdr_db,snr_db,mix_si_sdr_db,mix_snr_db,delta_si_sdr_db,"
         "delta_snr_db,loss,error\n";
  for (const auto& r : rows_) {
    out << r.id << ',';
    if (r.ok()) {
      out << FormatNumber(r.si_sdr_db) << ',' << FormatNumber(r.snr_db) << ','
          << FormatNumber(r.mix_si_sdr_db) << ','
          << FormatNumber(r.mix_snr_db) << ','
          << FormatNumber(r.delta_si_sdr_db()) << ','
          << FormatNumber(r.delta_snr_db()) << ',' << FormatNumber(r.loss)
          << ",\n";
    } else {
      std::string e = r.error;
      for (char& c : e) {
        if (c == ',' || c == '\n') c = ';';
      }
      out << ",,,,,,," << e << '\n';
    }
  }
  return out.str();
}

nlohmann::json MetricReport::ToJson() const {
  nlohmann::json j;
  j["tags"] = tags_;
  j["utterances"] = rows_.size();
  j["failed"] = failed();
  for (const auto& [key, a] : Aggregates()) {
    j["aggregates"][key] = {{"mean", a.mean}, {"ci95", a.ci95}, {"count", a.count}};
  }
  return j;
}

namespace {

void WriteText(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

}  // namespace

void MetricReport::WriteCsv(const std::string& path) const {
  WriteText(path, ToCsv());
}

void MetricReport::WriteJson(const std::string& path) const {
  WriteText(path, ToJson().dump(2) + "\n");
}

}  // namespace drn::metrics
