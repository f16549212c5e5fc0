#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "sentcorr/labels.hpp"

namespace sentcorr {

enum class FeatureMode { explicit_words, implicit_tags, characters };

std::string_view feature_mode_name(FeatureMode mode);  // "explicit" | "implicit" | "character"
FeatureMode feature_mode_from_name(const std::string& name);

/// word -> synonym tag. Words sharing a tag share one implicit feature.
struct SynonymDictionary {
    std::unordered_map<std::string, std::string> word_to_tag;
    std::size_t duplicate_lines = 0;  // later entries for an already-mapped word (first wins)
};

/// Token ids. Id 0 is always the reserved padding token "none", id 1 the
/// out-of-vocabulary token "<unk>".
struct Vocabulary {
    FeatureMode mode = FeatureMode::explicit_words;
    std::vector<std::string> id_to_token;              // index == id
    std::unordered_map<std::string, int> token_to_id;

    std::size_t size() const { return id_to_token.size(); }
    int id_of(const std::string& token) const;  // kUnkId for unknown tokens

    /// FNV-1a 64 over the canonical "id\ttoken\n" serialization, hex encoded.
    /// Checkpoints refuse to load against a different vocabulary.
    std::string digest() const;
};

inline constexpr int kNoneId = 0;
inline constexpr int kUnkId = 1;
inline constexpr const char* kNoneToken = "none";
inline constexpr const char* kUnkToken = "<unk>";

/// Fixed-length masked id sequence, the model's unit of input.
/// mask[i] == 0 implies ids[i] == kNoneId, and the mask is always a prefix
/// of ones followed by zeros.
struct EncodedSample {
    std::string id;
    std::vector<int> ids;
    std::vector<std::uint8_t> mask;
    SentimentLabel label = SentimentLabel::love;
    std::string dataset_key;

    int valid_len() const;
};

enum class Split { train, test };

struct RawRecord {
    std::string id;
    std::string text;
    SentimentLabel label = SentimentLabel::love;
    Split split = Split::train;
};

struct Corpus {
    std::vector<RawRecord> records;
    std::string dataset_key;

    std::vector<const RawRecord*> split(Split s) const;
};

struct EncodeStats {
    std::uint64_t truncations = 0;
};

// --------------------------------------------------------------------------
// Operations
// --------------------------------------------------------------------------

/// Tab-separated "tag<TAB>word" lines. Duplicate words keep the first
/// mapping and are counted in duplicate_lines.
SynonymDictionary load_synonym_dict(const std::string& path);

/// explicit: whitespace-split words. character: unicode scalar values,
/// whitespace excluded. implicit: explicit tokens mapped through the
/// dictionary, unmapped words pass through unchanged.
std::vector<std::string> tokenize(const std::string& text, FeatureMode mode,
                                  const SynonymDictionary* dict);

/// Ids 0 and 1 are reserved; the rest are ordered by (descending frequency,
/// lexicographic tie-break) over the train split, dropping tokens seen fewer
/// than min_count times.
Vocabulary build_vocab(const Corpus& corpus, FeatureMode mode, const SynonymDictionary* dict,
                       int min_count);

/// Map tokens to ids (unknown -> kUnkId), pad with kNoneId/mask 0 to length n,
/// truncate longer sequences to the first n tokens.
EncodedSample encode(const std::vector<std::string>& tokens, const Vocabulary& vocab, int n,
                     EncodeStats* stats = nullptr);

/// tokenize + encode + sample metadata in one step.
EncodedSample encode_record(const RawRecord& rec, const std::string& dataset_key,
                            const Vocabulary& vocab, const SynonymDictionary* dict, int n,
                            EncodeStats* stats = nullptr);

/// JSON-lines corpus: one object per line with fields id, text, label
/// (gd|zj|gx|ng|xq|fn) and split (train|test).
Corpus load_corpus_jsonl(const std::string& path, const std::string& dataset_key = "");

/// "id<TAB>token" lines, ids ascending from 0.
void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path, FeatureMode mode);

/// Longest tokenized train document, used for the default sequence length
/// min(longest, cap).
int longest_train_document(const Corpus& corpus, FeatureMode mode, const SynonymDictionary* dict);

}  // namespace sentcorr
