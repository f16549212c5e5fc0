#include "sentcorr/features.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sentcorr/error.hpp"

namespace sentcorr {

namespace {

bool is_space_byte(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::vector<std::string> split_whitespace(const std::string& text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space_byte(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !is_space_byte(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) out.emplace_back(text.substr(start, i - start));
    }
    return out;
}

// Byte length of the UTF-8 sequence starting at text[i]. Invalid leading
// bytes are consumed one at a time so tokenization stays total.
std::size_t utf8_len(const std::string& text, std::size_t i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    std::size_t len = 1;
    if ((c & 0x80u) == 0x00u) len = 1;
    else if ((c & 0xE0u) == 0xC0u) len = 2;
    else if ((c & 0xF0u) == 0xE0u) len = 3;
    else if ((c & 0xF8u) == 0xF0u) len = 4;
    if (i + len > text.size()) return 1;
    for (std::size_t k = 1; k < len; ++k) {
        if ((static_cast<unsigned char>(text[i + k]) & 0xC0u) != 0x80u) return 1;
    }
    return len;
}

std::vector<std::string> split_characters(const std::string& text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (is_space_byte(static_cast<unsigned char>(text[i]))) {
            ++i;
            continue;
        }
        const std::size_t len = utf8_len(text, i);
        out.emplace_back(text.substr(i, len));
        i += len;
    }
    return out;
}

std::string rstrip(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
    return s;
}

Split split_from_name(const std::string& name, const std::string& where) {
    if (name == "train") return Split::train;
    if (name == "test") return Split::test;
    throw input_error(where + ": unknown split '" + name + "' (expected train|test)");
}

}  // namespace

std::string_view feature_mode_name(FeatureMode mode) {
    switch (mode) {
        case FeatureMode::explicit_words: return "explicit";
        case FeatureMode::implicit_tags: return "implicit";
        case FeatureMode::characters: return "character";
    }
    return "explicit";
}

FeatureMode feature_mode_from_name(const std::string& name) {
    if (name == "explicit") return FeatureMode::explicit_words;
    if (name == "implicit") return FeatureMode::implicit_tags;
    if (name == "character") return FeatureMode::characters;
    throw usage_error("unknown feature mode '" + name + "' (expected explicit|implicit|character)");
}

int Vocabulary::id_of(const std::string& token) const {
    auto it = token_to_id.find(token);
    return it == token_to_id.end() ? kUnkId : it->second;
}

std::string Vocabulary::digest() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const char* data, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(data[i]);
            h *= 0x100000001b3ULL;
        }
    };
    for (std::size_t id = 0; id < id_to_token.size(); ++id) {
        const std::string line = std::to_string(id) + "\t" + id_to_token[id] + "\n";
        mix(line.data(), line.size());
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

int EncodedSample::valid_len() const {
    int n = 0;
    for (std::uint8_t m : mask) n += m;
    return n;
}

std::vector<const RawRecord*> Corpus::split(Split s) const {
    std::vector<const RawRecord*> out;
    for (const auto& r : records) {
        if (r.split == s) out.push_back(&r);
    }
    return out;
}

SynonymDictionary load_synonym_dict(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open synonym dictionary: " + path);
    SynonymDictionary dict;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = rstrip(line);
        if (line.empty()) continue;
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
            throw input_error(path + ":" + std::to_string(lineno) +
                              ": expected 'tag<TAB>word', got '" + line + "'");
        }
        const std::string tag = line.substr(0, tab);
        const std::string word = line.substr(tab + 1);
        auto [it, inserted] = dict.word_to_tag.emplace(word, tag);
        if (!inserted) ++dict.duplicate_lines;
    }
    return dict;
}

std::vector<std::string> tokenize(const std::string& text, FeatureMode mode,
                                  const SynonymDictionary* dict) {
    switch (mode) {
        case FeatureMode::explicit_words:
            return split_whitespace(text);
        case FeatureMode::characters:
            return split_characters(text);
        case FeatureMode::implicit_tags: {
            if (!dict) throw usage_error("implicit feature mode requires a synonym dictionary");
            std::vector<std::string> words = split_whitespace(text);
            for (auto& w : words) {
                auto it = dict->word_to_tag.find(w);
                if (it != dict->word_to_tag.end()) w = it->second;
            }
            return words;
        }
    }
    return {};
}

Vocabulary build_vocab(const Corpus& corpus, FeatureMode mode, const SynonymDictionary* dict,
                       int min_count) {
    if (min_count < 1) throw usage_error("min_count must be >= 1");
    std::unordered_map<std::string, std::int64_t> freq;
    bool any_train = false;
    for (const auto& rec : corpus.records) {
        if (rec.split != Split::train) continue;
        any_train = true;
        for (auto& tok : tokenize(rec.text, mode, dict)) ++freq[tok];
    }
    if (!any_train) throw input_error("cannot build vocabulary: training split is empty");

    std::vector<std::pair<std::string, std::int64_t>> items;
    items.reserve(freq.size());
    for (auto& kv : freq) {
        if (kv.second >= min_count) items.emplace_back(kv.first, kv.second);
    }
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary vocab;
    vocab.mode = mode;
    vocab.id_to_token = {kNoneToken, kUnkToken};
    vocab.token_to_id = {{kNoneToken, kNoneId}, {kUnkToken, kUnkId}};
    for (auto& [tok, cnt] : items) {
        if (vocab.token_to_id.count(tok)) continue;  // literal "none"/"<unk>" share the reserved id
        vocab.token_to_id.emplace(tok, static_cast<int>(vocab.id_to_token.size()));
        vocab.id_to_token.push_back(tok);
    }
    return vocab;
}

EncodedSample encode(const std::vector<std::string>& tokens, const Vocabulary& vocab, int n,
                     EncodeStats* stats) {
    if (n < 1) throw usage_error("sequence length must be >= 1");
    EncodedSample s;
    s.ids.assign(static_cast<std::size_t>(n), kNoneId);
    s.mask.assign(static_cast<std::size_t>(n), 0);
    const std::size_t keep = std::min<std::size_t>(tokens.size(), static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < keep; ++i) {
        s.ids[i] = vocab.id_of(tokens[i]);
        s.mask[i] = 1;
    }
    if (tokens.size() > static_cast<std::size_t>(n) && stats) ++stats->truncations;
    return s;
}

EncodedSample encode_record(const RawRecord& rec, const std::string& dataset_key,
                            const Vocabulary& vocab, const SynonymDictionary* dict, int n,
                            EncodeStats* stats) {
    EncodedSample s = encode(tokenize(rec.text, vocab.mode, dict), vocab, n, stats);
    s.id = rec.id;
    s.label = rec.label;
    s.dataset_key = dataset_key;
    return s;
}

Corpus load_corpus_jsonl(const std::string& path, const std::string& dataset_key) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open corpus: " + path);
    Corpus corpus;
    if (!dataset_key.empty()) {
        corpus.dataset_key = dataset_key;
    } else {
        // default dataset key: file name without directory and extension
        std::string stem = path;
        if (auto pos = stem.find_last_of("/\\"); pos != std::string::npos) stem = stem.substr(pos + 1);
        if (auto pos = stem.find_last_of('.'); pos != std::string::npos) stem = stem.substr(0, pos);
        corpus.dataset_key = stem;
    }
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = rstrip(line);
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            throw input_error(where + ": not a JSON object");
        }
        for (const char* field : {"id", "text", "label", "split"}) {
            if (!j.contains(field) || !j[field].is_string()) {
                throw input_error(where + ": missing string field '" + field + "'");
            }
        }
        RawRecord rec;
        rec.id = j["id"].get<std::string>();
        rec.text = j["text"].get<std::string>();
        const std::string tag = j["label"].get<std::string>();
        auto label = label_from_tag(tag);
        if (!label) throw input_error(where + ": unknown label tag '" + tag + "'");
        rec.label = *label;
        rec.split = split_from_name(j["split"].get<std::string>(), where);
        corpus.records.push_back(std::move(rec));
    }
    return corpus;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
    std::ostringstream out;
    for (std::size_t id = 0; id < vocab.id_to_token.size(); ++id) {
        out << id << '\t' << vocab.id_to_token[id] << '\n';
    }
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << out.str())) throw io_error("cannot write vocabulary: " + path);
}

Vocabulary load_vocabulary(const std::string& path, FeatureMode mode) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open vocabulary: " + path);
    Vocabulary vocab;
    vocab.mode = mode;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = rstrip(line);
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(lineno);
        const std::size_t tab = line.find('\t');
        if (tab == std::string::npos) throw input_error(where + ": expected 'id<TAB>token'");
        int id = 0;
        try {
            id = std::stoi(line.substr(0, tab));
        } catch (const std::exception&) {
            throw input_error(where + ": bad id '" + line.substr(0, tab) + "'");
        }
        if (id != static_cast<int>(vocab.id_to_token.size())) {
            throw input_error(where + ": ids must ascend from 0 without gaps");
        }
        vocab.id_to_token.push_back(line.substr(tab + 1));
    }
    if (vocab.id_to_token.size() < 2 || vocab.id_to_token[0] != kNoneToken ||
        vocab.id_to_token[1] != kUnkToken) {
        throw input_error(path + ": vocabulary must reserve id 0 for '" +
                          std::string(kNoneToken) + "' and id 1 for '" + kUnkToken + "'");
    }
    vocab.token_to_id.reserve(vocab.id_to_token.size());
    for (std::size_t id = 0; id < vocab.id_to_token.size(); ++id) {
        vocab.token_to_id.emplace(vocab.id_to_token[id], static_cast<int>(id));
    }
    return vocab;
}

int longest_train_document(const Corpus& corpus, FeatureMode mode, const SynonymDictionary* dict) {
    std::size_t longest = 0;
    for (const auto& rec : corpus.records) {
        if (rec.split != Split::train) continue;
        longest = std::max(longest, tokenize(rec.text, mode, dict).size());
    }
    return static_cast<int>(longest);
}

}  // namespace sentcorr
