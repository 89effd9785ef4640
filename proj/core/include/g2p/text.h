// Copyright (c) 2026 The g2p Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef G2P_TEXT_H_
#define G2P_TEXT_H_

#include <string>
#include <vector>

namespace g2p {

std::string trim(const std::string& s);
std::string to_upper_ascii(const std::string& s);
std::string to_lower_ascii(const std::string& s);
bool is_ascii_punct(char c);

std::vector<std::string> split_whitespace(const std::string& s);
std::vector<std::string> split_on(const std::string& s, char delim);

// UTF-8 code points as individual strings. Invalid lead bytes are passed
// through one byte at a time.
std::vector<std::string> split_codepoints(const std::string& s);

// A whitespace-delimited sentence token with leading/trailing ASCII
// punctuation peeled off. core may be empty when the token was punctuation
// only. Internal punctuation (apostrophes, hyphens) stays in core.
struct SentenceToken {
  std::vector<std::string> leading;
  std::string core;
  std::vector<std::string> trailing;
};

std::vector<SentenceToken> split_sentence_tokens(const std::string& sentence);

// Lower-cased sentence surface with whitespace runs collapsed to single
// spaces; this is the model's grapheme-side view of a sentence.
std::string normalize_grapheme_text(const std::string& sentence);

}  // namespace g2p

#endif  // G2P_TEXT_H_
