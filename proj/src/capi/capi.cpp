#include "smim/smim.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

#include "core/dataset_io.hpp"
#include "core/parallel.hpp"
#include "core/pipeline.hpp"

using smim::io::Config;
using smim::models::Dataset;
using smim::models::LinkSpec;
using smim::tensor::Frame;

struct smim_link {
  LinkSpec spec;
};
struct smim_frame {
  Frame frame;
};
struct smim_dataset {
  Dataset data;
};

namespace {

thread_local std::string t_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

smim_status fail(smim_status code, const char* what) {
  t_last_error = what ? what : "unknown error";
  return code;
}

// Maps exceptions to status codes; io failures carry the "io:" prefix from
// the core, estimator stalls are reported via dedicated exceptions below.
template <typename Fn>
smim_status guarded(Fn&& fn) {
  try {
    t_last_error.clear();
    return fn();
  } catch (const std::invalid_argument& e) {
    return fail(SMIM_ERR_INVALID, e.what());
  } catch (const std::length_error& e) {
    return fail(SMIM_ERR_INVALID, e.what());
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    if (what.rfind("io:", 0) == 0) return fail(SMIM_ERR_IO, e.what());
    return fail(SMIM_ERR_INTERNAL, e.what());
  } catch (const std::exception& e) {
    return fail(SMIM_ERR_INTERNAL, e.what());
  }
}

}  // namespace

extern "C" {

const char* smim_version(void) { return smim::io::version(); }

const char* smim_last_error(void) { return t_last_error.c_str(); }

void smim_set_threads(int n) { smim::parallel::set_threads(n); }

void smim_string_free(char* s) { std::free(s); }

/* ---- link ---- */

smim_status smim_link_create(const char* spec, smim_link** out) {
  if (!spec || !out) return fail(SMIM_ERR_INVALID, "null argument");
  return guarded([&] {
    *out = new smim_link{LinkSpec::parse(spec)};
    return SMIM_OK;
  });
}

void smim_link_destroy(smim_link* link) { delete link; }

int smim_link_index_dim(const smim_link* link) { return link ? link->spec.s : -1; }

int smim_link_label_arity(const smim_link* link) { return link ? link->spec.label_arity() : -1; }

smim_status smim_link_canonical(const smim_link* link, char** out) {
  if (!link || !out) return fail(SMIM_ERR_INVALID, "null argument");
  *out = dup_string(link->spec.canonical());
  return SMIM_OK;
}

/* ---- frame ---- */

smim_status smim_frame_random(int d, int s, uint64_t seed, smim_frame** out) {
  if (!out) return fail(SMIM_ERR_INVALID, "null argument");
  return guarded([&] {
    smim::Rng rng = smim::Rng::stream(seed, 0x6672616d65ULL);
    *out = new smim_frame{smim::tensor::random_frame(d, s, rng)};
    return SMIM_OK;
  });
}

smim_status smim_frame_create(int d, int s, const double* col_major, smim_frame** out) {
  if (!col_major || !out) return fail(SMIM_ERR_INVALID, "null argument");
  return guarded([&] {
    Eigen::MatrixXd m = Eigen::Map<const Eigen::MatrixXd>(col_major, d, s);
    *out = new smim_frame{Frame(std::move(m))};
    return SMIM_OK;
  });
}

void smim_frame_destroy(smim_frame* frame) { delete frame; }

int smim_frame_dim(const smim_frame* frame) { return frame ? frame->frame.dim() : -1; }

int smim_frame_rank(const smim_frame* frame) { return frame ? frame->frame.rank() : -1; }

smim_status smim_frame_data(const smim_frame* frame, double* out_col_major) {
  if (!frame || !out_col_major) return fail(SMIM_ERR_INVALID, "null argument");
  Eigen::Map<Eigen::MatrixXd>(out_col_major, frame->frame.dim(), frame->frame.rank()) =
      frame->frame.cols();
  return SMIM_OK;
}

smim_status smim_frame_distance(const smim_frame* a, const smim_frame* b, double* out) {
  if (!a || !b || !out) return fail(SMIM_ERR_INVALID, "null argument");
  return guarded([&] {
    *out = smim::tensor::frame_distance(a->frame, b->frame);
    return SMIM_OK;
  });
}

smim_status smim_frame_save(const smim_frame* frame, const char* path) {
  if (!frame || !path) return fail(SMIM_ERR_INVALID, "null argument");
  return guarded([&] {
    smim::io::save_frame(frame->frame, path);
    return SMIM_OK;
  });
}

smim_status smim_frame_load(const char* path, smim_frame** out) {
  if (!path || !out) return fail(SMIM_ERR_INVALID, "null argument");
  return guarded([&] {
    *out = new smim_frame{smim::io::load_frame(path)};
    return SMIM_OK;
  });
}

/* ---- dataset ---- */

smim_status smim_dataset_generate(const smim_link* link, const smim_frame* planted, int64_t n,
                                  uint64_t seed, smim_dataset** out) {
  if (!link || !planted || !out) return fail(SMIM_ERR_INVALID, "null argument");
  return guarded([&] {
    *out = new smim_dataset{
        smim::models::sample_mim(link->spec, planted->frame, static_cast<int>(n), seed)};
    return SMIM_OK;
  });
}

void smim_dataset_destroy(smim_dataset* data) { delete data; }

int smim_dataset_dim(const smim_dataset* data) { return data ? data->data.d : -1; }

int64_t smim_dataset_size(const smim_dataset* data) { return data ? data->data.n() : -1; }

int smim_dataset_arity(const smim_dataset* data) { return data ? data->data.arity() : -1; }

smim_status smim_dataset_save(const smim_dataset* data, const char* path, int binary) {
  if (!data || !path) return fail(SMIM_ERR_INVALID, "null argument");
  return guarded([&] {
    if (binary)
      smim::io::save_dataset_binary(data->data, path);
    else
      smim::io::save_dataset_text(data->data, path);
    return SMIM_OK;
  });
}

smim_status smim_dataset_load(const char* path, smim_dataset** out) {
  if (!path || !out) return fail(SMIM_ERR_INVALID, "null argument");
  return guarded([&] {
    *out = new smim_dataset{smim::io::load_dataset(path)};
    return SMIM_OK;
  });
}

/* ---- estimation ---- */

smim_status smim_estimate(const smim_dataset* data, const smim_link* link, const char* options,
                          const smim_frame* truth, smim_frame** frame_out,
                          char** report_json_out) {
  if (!data || !frame_out) return fail(SMIM_ERR_INVALID, "null argument");
  return guarded([&] {
    const Config cfg = Config::parse_string(options ? options : "");
    const smim::pipeline::EstimateOptions opt = smim::pipeline::EstimateOptions::from_config(cfg);
    const smim::pipeline::EstimateOutcome out = smim::pipeline::run_estimate(
        data->data, link ? &link->spec : nullptr, opt, truth ? &truth->frame : nullptr);
    *frame_out = new smim_frame{out.w_hat};
    if (report_json_out) *report_json_out = dup_string(smim::io::dump_report(out.report));
    if (out.stalled) return fail(SMIM_ERR_STALL, "estimator stalled on a degenerate step");
    return SMIM_OK;
  });
}

/* ---- planner ---- */

smim_status smim_complexity(const smim_link* link, const smim_frame* planted, const char* options,
                            char** report_json_out) {
  if (!link || !report_json_out) return fail(SMIM_ERR_INVALID, "null argument");
  return guarded([&] {
    const Config cfg = Config::parse_string(options ? options : "");
    smim::complexity::XiOptions xopt;
    xopt.n_mc = static_cast<int>(cfg.int_or("planner.mc", 60000));
    xopt.n_bins = static_cast<int>(cfg.int_or("planner.bins", 0));
    const int max_ell = static_cast<int>(cfg.int_or("planner.max_ell", 3));
    const uint64_t seed = cfg.uint_or("planner.seed", 1);
    Frame w;
    if (planted) {
      w = planted->frame;
    } else {
      smim::Rng rng = smim::Rng::stream(seed, 0x776672ULL);
      w = smim::tensor::random_frame(static_cast<int>(cfg.int_or("planner.d", 30)), link->spec.s,
                                     rng);
    }
    const smim::io::json report = smim::pipeline::run_complexity(link->spec, w, max_ell, xopt, seed);
    *report_json_out = dup_string(smim::io::dump_report(report));
    return SMIM_OK;
  });
}

smim_status smim_complexity_symbolic(const char* options, char** report_json_out) {
  if (!report_json_out) return fail(SMIM_ERR_INVALID, "null argument");
  return guarded([&] {
    const Config cfg = Config::parse_string(options ? options : "");
    const smim::io::json report = smim::pipeline::run_complexity_symbolic(cfg);
    *report_json_out = dup_string(smim::io::dump_report(report));
    return SMIM_OK;
  });
}

} /* extern "C" */
