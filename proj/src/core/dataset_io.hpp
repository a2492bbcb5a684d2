#pragma once

#include <string>

#include "core/frame.hpp"
#include "core/models.hpp"

namespace smim::io {

// Text format "SMIM v1": one header line
//   SMIM v1; d=<d>; n=<n>; label_arity=<k>; link=<hex hash>; seed=<u64>
// then n rows of y_1,...,y_k,z_1,...,z_d at full double precision.
// Binary variant: magic "SMIM", little-endian u32/u64 header, float64 payload.
void save_dataset_text(const models::Dataset& ds, const std::string& path);
void save_dataset_binary(const models::Dataset& ds, const std::string& path);
models::Dataset load_dataset(const std::string& path);  // sniffs the format

// Sidecar with the planted frame (evaluation only).
void save_frame(const tensor::Frame& f, const std::string& path);
tensor::Frame load_frame(const std::string& path);

std::string frame_sidecar_path(const std::string& dataset_path);

}  // namespace smim::io
