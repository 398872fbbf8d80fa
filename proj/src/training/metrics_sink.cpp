#include "snorm/training/metrics_sink.hpp"

#include <cmath>
#include <cstdio>

#include "snorm/error.hpp"
#include "snorm/net/serialize.hpp"

namespace snorm::training {

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::ofstream open_append(const std::filesystem::path& path, bool& fresh) {
  std::error_code ec;
  fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot open metric stream " + path.string());
  return out;
}

// JSON has no NaN; non-finite values become null.
io::Json finite_or_null(double x) { return std::isfinite(x) ? io::Json(x) : io::Json(nullptr); }

}  // namespace

std::string csv_header() { return "run_id,iter,wall_ms,loss_d,loss_g,sigma,frechet,mode_coverage"; }

std::string csv_row(const MetricRecord& r) {
  std::string sigma;
  for (std::size_t i = 0; i < r.sigma.size(); ++i) sigma += (i ? ";" : "") + num(r.sigma[i]);
  return r.run_id + "," + std::to_string(r.iter) + "," + num(r.wall_ms) + "," + num(r.loss_d) + "," +
         num(r.loss_g) + "," + sigma + "," + num(r.frechet) + "," + std::to_string(r.mode_coverage);
}

std::string jsonl_row(const MetricRecord& r) {
  io::Json sigma = io::Json::array();
  for (double s : r.sigma) sigma.push_back(finite_or_null(s));
  io::Json j{{"run_id", r.run_id},
             {"iter", r.iter},
             {"wall_ms", finite_or_null(r.wall_ms)},
             {"loss_d", finite_or_null(r.loss_d)},
             {"loss_g", finite_or_null(r.loss_g)},
             {"sigma", std::move(sigma)},
             {"frechet", finite_or_null(r.frechet)},
             {"mode_coverage", r.mode_coverage}};
  return j.dump();
}

void MemorySink::write(const MetricRecord& record) {
  std::lock_guard lock(mutex_);
  records_.push_back(record);
}

std::vector<MetricRecord> MemorySink::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

CsvSink::CsvSink(const std::filesystem::path& path) {
  bool fresh = false;
  out_ = open_append(path, fresh);
  if (fresh) out_ << csv_header() << '\n' << std::flush;
}

void CsvSink::write(const MetricRecord& record) {
  std::lock_guard lock(mutex_);
  out_ << csv_row(record) << '\n' << std::flush;
}

JsonlSink::JsonlSink(const std::filesystem::path& path) {
  bool fresh = false;
  out_ = open_append(path, fresh);
}

void JsonlSink::write(const MetricRecord& record) {
  std::lock_guard lock(mutex_);
  out_ << jsonl_row(record) << '\n' << std::flush;
}

}  // namespace snorm::training
