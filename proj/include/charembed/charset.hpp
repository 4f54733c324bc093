#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "charembed/tensor.hpp"

namespace charembed {

inline constexpr std::size_t kAlphabetSize = 70;
inline constexpr std::size_t kMaxChars = 150;

// The 70 symbol classes: a-z, 0-9, 32 punctuation marks, then UNK and PAD.
// Symbols are stored as UTF-8 strings so the alphabet can be written verbatim
// into checkpoint headers.
class Alphabet {
 public:
  static constexpr std::uint8_t kUnk = 68;
  static constexpr std::uint8_t kPad = 69;
  // Rendering of UNK by decode().
  static constexpr std::string_view kUnkGlyph = "\xEF\xBF\xBD";  // U+FFFD

  static const Alphabet& standard();

  std::size_t size() const { return symbols_.size(); }
  const std::vector<std::string>& symbols() const { return symbols_; }
  // Class index for a code point after lowercasing; kUnk when absent.
  std::uint8_t index_of(char32_t code_point) const;
  // Printable form of a class; UNK renders as kUnkGlyph, PAD as "".
  std::string_view render(std::uint8_t index) const;

 private:
  Alphabet();
  std::vector<std::string> symbols_;
  std::array<std::uint8_t, 128> ascii_index_{};
};

// A tweet as 150 one-hot rows over the 70 classes. Stored as class indices;
// dense() materializes the binary matrix.
class CharMatrix {
 public:
  CharMatrix();  // all PAD

  // Throws ContractError unless every row of a [150 x 70] tensor is one-hot.
  static CharMatrix from_dense(const Tensor& matrix);
  // Builds from explicit class indices, padded to 150 rows. Rows after the
  // first PAD are forced to PAD.
  static CharMatrix from_indices(const std::vector<std::uint8_t>& indices);

  std::uint8_t index(std::size_t row) const { return rows_[row]; }
  const std::array<std::uint8_t, kMaxChars>& indices() const { return rows_; }
  std::size_t length() const { return length_; }
  Real at(std::size_t row, std::size_t col) const { return rows_[row] == col ? 1.0 : 0.0; }

  Tensor dense() const;
  // One-hot vector of a single row.
  Tensor row_one_hot(std::size_t row) const;

  friend bool operator==(const CharMatrix&, const CharMatrix&) = default;

 private:
  std::array<std::uint8_t, kMaxChars> rows_;
  std::size_t length_ = 0;
};

// Lowercases, maps out-of-alphabet code points to UNK, truncates at 150 code
// points and pads with PAD. Invalid UTF-8 bytes map to UNK one byte at a time.
CharMatrix encode(std::string_view text);

// Inverse of encode for in-alphabet text; stops at the first PAD row.
std::string decode(const CharMatrix& matrix);
// Dense form; throws ContractError when a row is not one-hot.
std::string decode(const Tensor& matrix);
// Per-row argmax (lowest index on ties), then decode.
std::string decode_argmax(const Tensor& scores);

// Helpers shared with augmentation.
std::vector<char32_t> utf8_code_points(std::string_view text);
std::string to_lower_ascii(std::string_view text);

}  // namespace charembed
