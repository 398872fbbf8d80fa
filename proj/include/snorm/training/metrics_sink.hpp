#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>
#include <vector>

namespace snorm::training {

/// One logged measurement of a training run.
struct MetricRecord {
  std::string run_id;
  long iter = 0;
  double wall_ms = 0.0;
  double loss_d = 0.0;
  double loss_g = 0.0;
  std::vector<double> sigma;  // oracle spectral norm of each discriminator effective weight
  double frechet = 0.0;
  int mode_coverage = 0;

  friend bool operator==(const MetricRecord&, const MetricRecord&) = default;
};

/// Receives records; implementations must tolerate concurrent writes.
class MetricSink {
 public:
  virtual ~MetricSink() = default;
  virtual void write(const MetricRecord& record) = 0;
};

std::string csv_header();
/// Numbers printed with %.17g; sigma values joined by ';'.
std::string csv_row(const MetricRecord& record);
std::string jsonl_row(const MetricRecord& record);

class MemorySink : public MetricSink {
 public:
  void write(const MetricRecord& record) override;
  std::vector<MetricRecord> records() const;

 private:
  mutable std::mutex mutex_;
  std::vector<MetricRecord> records_;
};

/// Appends rows to a file, writing the header first when the file is new or empty.
class CsvSink : public MetricSink {
 public:
  explicit CsvSink(const std::filesystem::path& path);
  void write(const MetricRecord& record) override;

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

class JsonlSink : public MetricSink {
 public:
  explicit JsonlSink(const std::filesystem::path& path);
  void write(const MetricRecord& record) override;

 private:
  std::mutex mutex_;
  std::ofstream out_;
};

}  // namespace snorm::training
