#include "gfflab/manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <stdexcept>

namespace gfflab::io {

CsvWriter::CsvWriter(const std::string& path) : path_(path), os_(path) {
  if (!os_) throw std::runtime_error("CsvWriter: cannot open " + path);
  os_.precision(17);
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    os_ << (i ? "," : "") << columns[i];
  }
  os_ << '\n';
}

void CsvWriter::field(const std::string& v) {
  if (row_started_) os_ << ',';
  os_ << v;
  row_started_ = true;
}

void CsvWriter::field(double v) {
  if (row_started_) os_ << ',';
  os_ << v;
  row_started_ = true;
}

void CsvWriter::field(std::uint64_t v) {
  if (row_started_) os_ << ',';
  os_ << v;
  row_started_ = true;
}

void CsvWriter::field(std::int64_t v) {
  if (row_started_) os_ << ',';
  os_ << v;
  row_started_ = true;
}

void CsvWriter::field(int v) { field(std::int64_t(v)); }

void CsvWriter::end_row() {
  os_ << '\n';
  row_started_ = false;
}

std::vector<std::string> CsvWriter::estimate_columns() {
  return {"mean", "sem", "n", "successes", "wilson_low", "wilson_high",
          "upper95"};
}

void CsvWriter::estimate_fields(const stats::Estimate& e) {
  field(e.mean);
  field(e.sem);
  field(std::uint64_t(e.n));
  field(std::uint64_t(e.successes));
  field(e.wilson_low);
  field(e.wilson_high);
  field(e.upper95);
}

void CsvWriter::close() { os_.close(); }

std::string sha256_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw std::runtime_error("sha256_file: cannot open " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  unsigned char buf[65536];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) {
    EVP_DigestUpdate(ctx, buf, n);
  }
  std::fclose(f);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::write(const std::string& path) const {
  nlohmann::json j;
  j["config"] = config;
  j["software_version"] = software_version;
  j["started_utc"] = started_utc;
  j["finished_utc"] = finished_utc;
  j["wall_seconds"] = wall_seconds;
  j["acceptance_rates"] = acceptance_rates;
  nlohmann::json files = nlohmann::json::object();
  for (const std::string& f : this->files) {
    files[f] = sha256_file(f);
  }
  j["file_digests"] = files;
  std::ofstream os(path);
  if (!os) throw std::runtime_error("RunManifest: cannot open " + path);
  os << j.dump(2) << '\n';
}

}  // namespace gfflab::io
