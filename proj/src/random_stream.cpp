#include "riskprec/random_stream.hpp"

#include "riskprec/errors.hpp"

namespace riskprec {

std::uint64_t RandomStream::next_u64() {
    if (cursor_ >= 4) {
        if (ctr_[0] == 0u && consumed_ > 0) {
            throw NumericalError("random stream exhausted its 2^32 block budget");
        }
        block_ = Philox4x32::apply(ctr_, key_);
        ++ctr_[0];
        cursor_ = 0;
    }
    const std::uint64_t hi = block_[cursor_];
    const std::uint64_t lo = block_[cursor_ + 1];
    cursor_ += 2;
    ++consumed_;
    return (hi << 32) | lo;
}

double RandomStream::uniform() {
    // (k + 0.5) / 2^53 lies strictly inside (0, 1).
    const std::uint64_t bits = next_u64() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace riskprec
