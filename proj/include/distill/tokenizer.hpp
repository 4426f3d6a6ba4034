#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace distill {

// Length measure used by the cosine reward and the behaviour metrics.
// The default implementation splits on whitespace runs; anything that
// yields a stable token count (a subword tokenizer, a byte counter)
// can be plugged in instead.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;

    virtual std::vector<std::string> tokenize(std::string_view text) const = 0;

    // Token count without materializing the tokens.
    virtual std::size_t count_tokens(std::string_view text) const;
};

class WhitespaceTokenizer final : public Tokenizer {
public:
    std::vector<std::string> tokenize(std::string_view text) const override;
    std::size_t count_tokens(std::string_view text) const override;
};

} // namespace distill
