#pragma once

#include "qsan/cmat.hpp"

namespace qsan {

// Attention channel. `pos` is the ordinary softmax; `neg` is -softmax(-v),
// which assigns the largest magnitude to the most negative entry.
enum class Channel { pos, neg };

const char* to_string(Channel c);

// Max-subtracted softmax on a real vector, signed per channel.
RVec softmax_signed(const RVec& v, Channel channel);

// softmax_signed applied to the real and imaginary planes of each row separately.
CMat csoftmax(const CMat& v, Channel channel);

}  // namespace qsan
