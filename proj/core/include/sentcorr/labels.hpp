#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace sentcorr {

/// The six sentiment classes. Index order is fixed forever: checkpoints,
/// CSV columns and confusion-matrix axes all depend on it.
enum class SentimentLabel : int {
    love = 0,      // gd
    fear = 1,      // zj
    joy = 2,       // gx
    sadness = 3,   // ng
    surprise = 4,  // xq
    anger = 5,     // fn
};

inline constexpr int kNumLabels = 6;

inline constexpr std::array<std::string_view, kNumLabels> kLabelTags = {
    "gd", "zj", "gx", "ng", "xq", "fn"};

inline constexpr std::array<std::string_view, kNumLabels> kLabelNames = {
    "love", "fear", "joy", "sadness", "surprise", "anger"};

constexpr std::string_view label_tag(SentimentLabel l) {
    return kLabelTags[static_cast<std::size_t>(l)];
}

constexpr std::string_view label_name(SentimentLabel l) {
    return kLabelNames[static_cast<std::size_t>(l)];
}

constexpr int label_index(SentimentLabel l) { return static_cast<int>(l); }

inline std::optional<SentimentLabel> label_from_tag(std::string_view tag) {
    for (int i = 0; i < kNumLabels; ++i) {
        if (kLabelTags[static_cast<std::size_t>(i)] == tag) {
            return static_cast<SentimentLabel>(i);
        }
    }
    return std::nullopt;
}

}  // namespace sentcorr
