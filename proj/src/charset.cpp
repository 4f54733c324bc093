#include "charembed/charset.hpp"

#include <algorithm>

#include "charembed/errors.hpp"

namespace charembed {
namespace {

constexpr std::string_view kLetters = "abcdefghijklmnopqrstuvwxyz";
constexpr std::string_view kDigits = "0123456789";
// Punctuation in listing order, duplicate '-' removed.
constexpr std::string_view kSpecials = "-,;.!?:'\"/\\|_@#$%&^*~`+=<>()[]{}";

static_assert(kLetters.size() + kDigits.size() + kSpecials.size() + 2 == kAlphabetSize);

std::uint8_t lowest_argmax(std::span<const Real> row) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < row.size(); ++i) {
    if (row[i] > row[best]) best = i;
  }
  return static_cast<std::uint8_t>(best);
}

}  // namespace

Alphabet::Alphabet() {
  ascii_index_.fill(kUnk);
  for (std::string_view group : {kLetters, kDigits, kSpecials}) {
    for (char ch : group) {
      ascii_index_[static_cast<unsigned char>(ch)] = static_cast<std::uint8_t>(symbols_.size());
      symbols_.emplace_back(1, ch);
    }
  }
  symbols_.emplace_back("<unk>");
  symbols_.emplace_back("<pad>");
}

const Alphabet& Alphabet::standard() {
  static const Alphabet alphabet;
  return alphabet;
}

std::uint8_t Alphabet::index_of(char32_t cp) const {
  if (cp >= 'A' && cp <= 'Z') cp = cp - 'A' + 'a';
  if (cp < 128) return ascii_index_[cp];
  return kUnk;
}

std::string_view Alphabet::render(std::uint8_t index) const {
  if (index == kUnk) return kUnkGlyph;
  if (index == kPad) return {};
  return symbols_.at(index);
}

CharMatrix::CharMatrix() { rows_.fill(Alphabet::kPad); }

CharMatrix CharMatrix::from_indices(const std::vector<std::uint8_t>& indices) {
  CharMatrix m;
  const std::size_t n = std::min(indices.size(), kMaxChars);
  for (std::size_t i = 0; i < n; ++i) {
    if (indices[i] >= kAlphabetSize) throw ContractError("class index out of range");
    m.rows_[i] = indices[i];
  }
  // Everything from the first PAD on is padding.
  m.length_ = 0;
  while (m.length_ < kMaxChars && m.rows_[m.length_] != Alphabet::kPad) ++m.length_;
  std::fill(m.rows_.begin() + static_cast<std::ptrdiff_t>(m.length_), m.rows_.end(), Alphabet::kPad);
  return m;
}

CharMatrix CharMatrix::from_dense(const Tensor& matrix) {
  if (matrix.shape() != Shape{kMaxChars, kAlphabetSize}) {
    throw DimensionError("character matrix must be " + shape_string({kMaxChars, kAlphabetSize}) + ", got " +
                         shape_string(matrix.shape()));
  }
  std::vector<std::uint8_t> indices(kMaxChars);
  for (std::size_t r = 0; r < kMaxChars; ++r) {
    int hot = -1;
    for (std::size_t c = 0; c < kAlphabetSize; ++c) {
      const Real v = matrix.at(r, c);
      if (v == 1.0 && hot < 0) {
        hot = static_cast<int>(c);
      } else if (v != 0.0) {
        hot = -2;
        break;
      }
    }
    if (hot < 0) throw ContractError("row " + std::to_string(r) + " is not one-hot");
    indices[r] = static_cast<std::uint8_t>(hot);
  }
  return from_indices(indices);
}

Tensor CharMatrix::dense() const {
  Tensor t({kMaxChars, kAlphabetSize});
  for (std::size_t r = 0; r < kMaxChars; ++r) t.at(r, rows_[r]) = 1.0;
  return t;
}

Tensor CharMatrix::row_one_hot(std::size_t row) const {
  Tensor t({kAlphabetSize});
  t[rows_.at(row)] = 1.0;
  return t;
}

std::vector<char32_t> utf8_code_points(std::string_view text) {
  // Malformed sequences yield one U+FFFD per offending byte.
  constexpr char32_t kBad = 0xFFFD;
  std::vector<char32_t> out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto b0 = static_cast<unsigned char>(text[i]);
    std::size_t extra = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      extra = 1;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      extra = 2;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      extra = 3;
      cp = b0 & 0x07;
    } else {
      out.push_back(kBad);
      ++i;
      continue;
    }
    bool ok = i + extra < text.size();
    for (std::size_t k = 1; ok && k <= extra; ++k) {
      const auto b = static_cast<unsigned char>(text[i + k]);
      if ((b & 0xC0) != 0x80) {
        ok = false;
      } else {
        cp = (cp << 6) | (b & 0x3F);
      }
    }
    if (!ok) {
      out.push_back(kBad);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (char& ch : out) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  return out;
}

CharMatrix encode(std::string_view text) {
  const Alphabet& alphabet = Alphabet::standard();
  const auto cps = utf8_code_points(text);
  std::vector<std::uint8_t> indices;
  indices.reserve(std::min(cps.size(), kMaxChars));
  for (std::size_t i = 0; i < cps.size() && i < kMaxChars; ++i) indices.push_back(alphabet.index_of(cps[i]));
  return CharMatrix::from_indices(indices);
}

std::string decode(const CharMatrix& matrix) {
  const Alphabet& alphabet = Alphabet::standard();
  std::string out;
  for (std::size_t r = 0; r < kMaxChars && matrix.index(r) != Alphabet::kPad; ++r) {
    out += alphabet.render(matrix.index(r));
  }
  return out;
}

std::string decode(const Tensor& matrix) { return decode(CharMatrix::from_dense(matrix)); }

std::string decode_argmax(const Tensor& scores) {
  if (scores.rank() != 2 || scores.dim(1) != kAlphabetSize) {
    throw DimensionError("decode_argmax expects [rows x 70], got " + shape_string(scores.shape()));
  }
  std::vector<std::uint8_t> indices;
  for (std::size_t r = 0; r < scores.dim(0); ++r) indices.push_back(lowest_argmax(scores.row(r)));
  return decode(CharMatrix::from_indices(indices));
}

}  // namespace charembed
