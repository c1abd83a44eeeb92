#include "metaprobe/tokenizer.hpp"

#include <cctype>

namespace metaprobe {

Tokenization tokenize(const std::string& sentence) {
    Tokenization out;
    std::string cur;
    for (char c : sentence) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) {
                out.tokens.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) out.tokens.push_back(cur);

    if (!out.tokens.empty()) {
        std::string& last = out.tokens.back();
        size_t i = last.size();
        while (i > 0 && (last[i - 1] == '.' || last[i - 1] == '!' || last[i - 1] == '?')) --i;
        out.terminal = last.substr(i);
        last.erase(i);
        if (last.empty()) out.tokens.pop_back();
    }
    return out;
}

std::string detokenize(const std::vector<std::string>& tokens, const std::string& terminal) {
    std::string out;
    for (size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(' ');
        out += tokens[i];
    }
    out += terminal;
    return out;
}

}  // namespace metaprobe
