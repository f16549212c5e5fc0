#pragma once

#include <cstdint>
#include <string>

#include "sentcorr/error.hpp"
#include "sentcorr/model.hpp"

namespace sentcorr {

/// On disk: magic "SNTC", little-endian u32 version, u32 header length, a
/// UTF-8 JSON header (kind, model config, vocabulary digest and size, epoch,
/// seed, dtype), then the parameter tensors as little-endian real arrays in
/// ModelParams::tensors() order. dtype f64 round-trips bitwise; f32 halves
/// the file at reduced precision.
struct Checkpoint {
    std::uint32_t version = 1;
    ModelKind kind = ModelKind::cnn_lstm2;
    ModelConfig config;
    std::string vocab_digest;
    std::size_t vocab_size = 0;
    int epoch = 0;
    std::uint64_t seed = 0;
    ModelParams params;
};

enum class CheckpointFault {
    bad_magic,
    version_mismatch,
    digest_mismatch,
    truncated,
    header_invalid,
};

class CheckpointError : public Error {
public:
    CheckpointError(CheckpointFault fault, const std::string& msg)
        : Error(ExitStatus::input_format, msg), fault_(fault) {}
    CheckpointFault fault() const { return fault_; }

private:
    CheckpointFault fault_;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path, bool as_f32 = false);

Checkpoint load_checkpoint(const std::string& path);

/// Refuses to load when the stored vocabulary digest differs.
Checkpoint load_checkpoint(const std::string& path, const std::string& expected_digest);

}  // namespace sentcorr
