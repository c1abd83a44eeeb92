#pragma once

#include <string>
#include <vector>

namespace metaprobe {

// Whitespace tokenization with the terminal sentence punctuation (a trailing
// run of . ! ?) detached from the last token and carried separately, so every
// shuffle can keep it sentence-final. All other punctuation stays attached.
struct Tokenization {
    std::vector<std::string> tokens;
    std::string terminal;
};

Tokenization tokenize(const std::string& sentence);

// Join with single spaces, then attach the terminal without a preceding space.
std::string detokenize(const std::vector<std::string>& tokens, const std::string& terminal);

}  // namespace metaprobe
