#include "aeas/retrieval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace aeas {

namespace {

bool is_token_char(unsigned char c) {
    return std::isalnum(c) || c == '_' || c >= 0x80;
}

struct Word {
    std::size_t begin;
    std::size_t end;
};

std::vector<Word> split_words(std::string_view text) {
    std::vector<Word> words;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
        }
        const std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) {
            ++i;
        }
        if (i > start) {
            words.push_back({start, i});
        }
    }
    return words;
}

} // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (is_token_char(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) {
        out.push_back(std::move(cur));
    }
    return out;
}

std::vector<Chunk> chunk_documents(std::span<const SourceDocument> docs, std::size_t window_words,
                                   std::size_t overlap_words) {
    window_words = std::max<std::size_t>(window_words, 1);
    const std::size_t stride = window_words > overlap_words ? window_words - overlap_words : 1;
    std::vector<Chunk> chunks;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        const std::string_view text = docs[d].text;
        const auto words = split_words(text);
        std::size_t chunk_index = 0;
        std::size_t line = 1;
        std::size_t line_pos = 0; // offset up to which `line` has been counted
        for (std::size_t start = 0; start < words.size(); start += stride) {
            const std::size_t last = std::min(start + window_words, words.size()) - 1;
            const std::size_t begin = words[start].begin;
            line += static_cast<std::size_t>(
                std::count(text.begin() + static_cast<std::ptrdiff_t>(line_pos),
                           text.begin() + static_cast<std::ptrdiff_t>(begin), '\n'));
            line_pos = begin;
            Chunk c;
            c.doc_index = d;
            c.chunk_index = chunk_index++;
            c.source = docs[d].source;
            c.first_line = line;
            c.text = std::string(text.substr(begin, words[last].end - begin));
            chunks.push_back(std::move(c));
            if (last + 1 == words.size()) {
                break;
            }
        }
    }
    return chunks;
}

LexicalIndex::LexicalIndex(std::vector<Chunk> chunks) : chunks_(std::move(chunks)) {
    for (std::size_t i = 0; i < chunks_.size(); ++i) {
        std::map<std::string, std::size_t> tf;
        for (auto& token : tokenize(chunks_[i].text)) {
            ++tf[std::move(token)];
        }
        for (const auto& [term, count] : tf) {
            postings_[term].push_back({i, count});
        }
    }
}

std::size_t LexicalIndex::document_frequency(const std::string& term) const {
    const auto it = postings_.find(term);
    return it == postings_.end() ? 0 : it->second.size();
}

std::vector<ScoredChunk> LexicalIndex::search(std::string_view query, std::size_t k) const {
    if (k == 0 || chunks_.empty()) {
        return {};
    }
    const auto terms = tokenize(query);
    const std::set<std::string> distinct(terms.begin(), terms.end());
    std::vector<double> scores(chunks_.size(), 0.0);
    const double n = static_cast<double>(chunks_.size());
    for (const auto& term : distinct) {
        const auto it = postings_.find(term);
        if (it == postings_.end()) {
            continue;
        }
        const double idf = std::log(1.0 + n / static_cast<double>(it->second.size()));
        for (const auto& p : it->second) {
            scores[p.chunk] += static_cast<double>(p.tf) * idf;
        }
    }
    std::vector<ScoredChunk> hits;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] > 0.0) {
            hits.push_back({i, scores[i]});
        }
    }
    // Chunks are stored in (document, chunk) order, so the index is the tie-break.
    std::stable_sort(hits.begin(), hits.end(),
                     [](const ScoredChunk& a, const ScoredChunk& b) { return a.score > b.score; });
    if (hits.size() > k) {
        hits.resize(k);
    }
    return hits;
}

std::vector<Chunk> index_and_retrieve(std::string_view query, std::span<const SourceDocument> docs,
                                      std::size_t k, std::size_t window_words,
                                      std::size_t overlap_words) {
    const LexicalIndex index(chunk_documents(docs, window_words, overlap_words));
    std::vector<Chunk> out;
    for (const auto& hit : index.search(query, k)) {
        out.push_back(index.chunks()[hit.chunk]);
    }
    return out;
}

} // namespace aeas
