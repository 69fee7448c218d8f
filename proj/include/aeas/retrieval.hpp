#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace aeas {

struct SourceDocument {
    std::string source; // file path or URL
    std::string text;
};

struct Chunk {
    std::size_t doc_index = 0;
    std::size_t chunk_index = 0;
    std::string source;
    std::size_t first_line = 1;
    std::string text;
};

/// Lower-cased runs of letters, digits and underscores.
std::vector<std::string> tokenize(std::string_view text);

/// Fixed word windows with overlap; each chunk's text is the original span
/// (line breaks preserved) from its first to its last word.
std::vector<Chunk> chunk_documents(std::span<const SourceDocument> docs, std::size_t window_words = 400,
                                   std::size_t overlap_words = 50);

struct ScoredChunk {
    std::size_t chunk = 0; // index into the index's chunk list
    double score = 0.0;
};

/// Inverted index over chunks. Score of a chunk for a query is the sum over
/// distinct query terms of tf(term, chunk) * ln(1 + N / df(term)).
class LexicalIndex {
public:
    explicit LexicalIndex(std::vector<Chunk> chunks);

    /// Up to k chunks with positive score, best first; ties keep (document,
    /// chunk) order.
    std::vector<ScoredChunk> search(std::string_view query, std::size_t k) const;

    const std::vector<Chunk>& chunks() const noexcept { return chunks_; }
    std::size_t document_frequency(const std::string& term) const;

private:
    struct Posting {
        std::size_t chunk;
        std::size_t tf;
    };
    std::vector<Chunk> chunks_;
    std::map<std::string, std::vector<Posting>, std::less<>> postings_;
};

std::vector<Chunk> index_and_retrieve(std::string_view query, std::span<const SourceDocument> docs,
                                      std::size_t k, std::size_t window_words = 400,
                                      std::size_t overlap_words = 50);

} // namespace aeas
