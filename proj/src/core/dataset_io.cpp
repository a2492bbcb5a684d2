#include "core/dataset_io.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <vector>

namespace smim::io {

namespace {

[[noreturn]] void io_fail(const std::string& path, const std::string& what) {
  throw std::runtime_error("io: " + what + ": " + path);
}

void write_doubles_csv(std::FILE* f, const double* v, int n, bool lead_comma) {
  for (int i = 0; i < n; ++i) {
    std::fprintf(f, "%s%.17g", (i || lead_comma) ? "," : "", v[i]);
  }
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

void save_dataset_text(const models::Dataset& ds, const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "w"));
  if (!f) io_fail(path, "cannot open for writing");
  std::fprintf(f.get(), "SMIM v1; d=%d; n=%d; label_arity=%d; link=%016" PRIx64 "; seed=%" PRIu64 "\n",
               ds.d, ds.n(), ds.arity(), ds.link_hash, ds.seed);
  for (int i = 0; i < ds.n(); ++i) {
    write_doubles_csv(f.get(), ds.y.col(i).data(), ds.arity(), false);
    write_doubles_csv(f.get(), ds.z.col(i).data(), ds.d, true);
    std::fputc('\n', f.get());
  }
  if (std::ferror(f.get())) io_fail(path, "write error");
}

void save_dataset_binary(const models::Dataset& ds, const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "wb"));
  if (!f) io_fail(path, "cannot open for writing");
  const char magic[4] = {'S', 'M', 'I', 'M'};
  const uint32_t version = 1;
  const uint64_t d = ds.d, n = ds.n(), k = ds.arity(), seed = ds.seed, link = ds.link_hash;
  std::fwrite(magic, 1, 4, f.get());
  std::fwrite(&version, sizeof version, 1, f.get());
  std::fwrite(&d, sizeof d, 1, f.get());
  std::fwrite(&n, sizeof n, 1, f.get());
  std::fwrite(&k, sizeof k, 1, f.get());
  std::fwrite(&seed, sizeof seed, 1, f.get());
  std::fwrite(&link, sizeof link, 1, f.get());
  for (int i = 0; i < ds.n(); ++i) {
    std::fwrite(ds.y.col(i).data(), sizeof(double), ds.arity(), f.get());
    std::fwrite(ds.z.col(i).data(), sizeof(double), ds.d, f.get());
  }
  if (std::ferror(f.get())) io_fail(path, "write error");
}

namespace {

models::Dataset load_dataset_binary(std::FILE* f, const std::string& path) {
  uint32_t version = 0;
  uint64_t d = 0, n = 0, k = 0, seed = 0, link = 0;
  if (std::fread(&version, sizeof version, 1, f) != 1 || version != 1) io_fail(path, "bad version");
  if (std::fread(&d, sizeof d, 1, f) != 1 || std::fread(&n, sizeof n, 1, f) != 1 ||
      std::fread(&k, sizeof k, 1, f) != 1 || std::fread(&seed, sizeof seed, 1, f) != 1 ||
      std::fread(&link, sizeof link, 1, f) != 1)
    io_fail(path, "truncated header");
  models::Dataset ds;
  ds.d = static_cast<int>(d);
  ds.seed = seed;
  ds.link_hash = link;
  ds.y.resize(k, n);
  ds.z.resize(d, n);
  for (uint64_t i = 0; i < n; ++i) {
    if (std::fread(ds.y.col(i).data(), sizeof(double), k, f) != k ||
        std::fread(ds.z.col(i).data(), sizeof(double), d, f) != d)
      io_fail(path, "truncated payload");
  }
  return ds;
}

models::Dataset load_dataset_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open");
  std::string header;
  if (!std::getline(in, header)) io_fail(path, "empty file");
  int d = -1, n = -1, k = -1;
  uint64_t seed = 0, link = 0;
  if (std::sscanf(header.c_str(),
                  "SMIM v1; d=%d; n=%d; label_arity=%d; link=%" SCNx64 "; seed=%" SCNu64, &d, &n,
                  &k, &link, &seed) != 5)
    io_fail(path, "bad header: " + header);
  if (d < 1 || n < 1 || k < 1) io_fail(path, "bad dimensions in header");
  models::Dataset ds;
  ds.d = d;
  ds.seed = seed;
  ds.link_hash = link;
  ds.y.resize(k, n);
  ds.z.resize(d, n);
  std::string line;
  for (int i = 0; i < n; ++i) {
    if (!std::getline(in, line)) io_fail(path, "missing row " + std::to_string(i));
    const char* p = line.c_str();
    for (int j = 0; j < k + d; ++j) {
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p) io_fail(path, "bad number in row " + std::to_string(i));
      if (j < k)
        ds.y(j, i) = v;
      else
        ds.z(j - k, i) = v;
      p = end;
      while (*p == ',' || *p == ' ') ++p;
    }
  }
  return ds;
}

}  // namespace

models::Dataset load_dataset(const std::string& path) {
  FilePtr f(std::fopen(path.c_str(), "rb"));
  if (!f) io_fail(path, "cannot open");
  char magic[4] = {};
  if (std::fread(magic, 1, 4, f.get()) != 4) io_fail(path, "too short");
  if (std::memcmp(magic, "SMIM", 4) == 0 && true) {
    // both formats start with SMIM; the text header continues with " v1;"
    char probe[3] = {};
    const std::size_t got = std::fread(probe, 1, 3, f.get());
    if (got == 3 && probe[0] == ' ' && probe[1] == 'v') {
      f.reset();
      return load_dataset_text(path);
    }
    std::fseek(f.get(), 4, SEEK_SET);
    return load_dataset_binary(f.get(), path);
  }
  io_fail(path, "not an SMIM dataset");
}

void save_frame(const tensor::Frame& f, const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "w"));
  if (!fp) io_fail(path, "cannot open for writing");
  std::fprintf(fp.get(), "SMIM-FRAME v1; d=%d; s=%d\n", f.dim(), f.rank());
  std::fprintf(fp.get(), "# planted frame; for evaluation only\n");
  for (int i = 0; i < f.dim(); ++i) {
    for (int j = 0; j < f.rank(); ++j)
      std::fprintf(fp.get(), "%s%.17g", j ? "," : "", f.cols()(i, j));
    std::fputc('\n', fp.get());
  }
  if (std::ferror(fp.get())) io_fail(path, "write error");
}

tensor::Frame load_frame(const std::string& path) {
  std::ifstream in(path);
  if (!in) io_fail(path, "cannot open");
  std::string header;
  if (!std::getline(in, header)) io_fail(path, "empty file");
  int d = -1, s = -1;
  if (std::sscanf(header.c_str(), "SMIM-FRAME v1; d=%d; s=%d", &d, &s) != 2)
    io_fail(path, "bad frame header");
  Eigen::MatrixXd m(d, s);
  std::string line;
  for (int i = 0; i < d; ++i) {
    if (!std::getline(in, line)) io_fail(path, "missing frame row");
    if (!line.empty() && line[0] == '#') {
      --i;
      continue;
    }
    const char* p = line.c_str();
    for (int j = 0; j < s; ++j) {
      char* end = nullptr;
      m(i, j) = std::strtod(p, &end);
      if (end == p) io_fail(path, "bad number in frame row");
      p = end;
      while (*p == ',' || *p == ' ') ++p;
    }
  }
  return tensor::Frame(std::move(m), 1e-9);
}

std::string frame_sidecar_path(const std::string& dataset_path) { return dataset_path + ".frame"; }

}  // namespace smim::io
