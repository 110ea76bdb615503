#include "seqscore/text.hpp"

#include <cctype>
#include <sstream>

namespace seqscore {

std::vector<std::string> normalized_tokens(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::ispunct(c)) continue;
    cleaned.push_back(static_cast<char>(std::tolower(c)));
  }
  std::vector<std::string> tokens;
  std::istringstream in(cleaned);
  std::string tok;
  while (in >> tok) {
    if (tok == "a" || tok == "an" || tok == "the") continue;
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

std::string normalize_answer(std::string_view text) {
  std::string out;
  for (const auto& tok : normalized_tokens(text)) {
    if (!out.empty()) out.push_back(' ');
    out += tok;
  }
  return out;
}

}  // namespace seqscore
