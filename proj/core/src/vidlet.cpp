#include "smnae/vidlet.hpp"

#include <string>

#include "smnae/errors.hpp"

namespace smnae {

void VideoSequence::validate() const {
  if (frames.empty()) throw ValidationError("VideoSequence: no frames");
  for (const auto& f : frames) {
    if (f.size() != frame_dim) {
      throw ValidationError("VideoSequence: frame size " + std::to_string(f.size()) +
                            " does not match frame_dim " + std::to_string(frame_dim));
    }
  }
}

std::vector<Vidlet> extract_vidlets(const VideoSequence& video, std::size_t z) {
  if (z < 1) throw ValidationError("extract_vidlets: z must be at least 1");
  video.validate();
  const std::size_t window = 2 * z + 1;
  if (video.length() < window) {
    throw ValidationError("extract_vidlets: video has " + std::to_string(video.length()) +
                          " frames but a vidlet needs " + std::to_string(window) +
                          "; cycle the frames first (cycle_align)");
  }
  std::vector<Vidlet> out;
  for (std::size_t start = 0; start + window <= video.length(); start += window) {
    Vidlet v;
    v.frames.assign(video.frames.begin() + start, video.frames.begin() + start + window);
    v.pivot_index = z;
    v.source_offset = start;
    out.push_back(std::move(v));
  }
  return out;
}

std::pair<VideoSequence, VideoSequence> cycle_align(const VideoSequence& a,
                                                    const VideoSequence& b) {
  a.validate();
  b.validate();
  auto cycle_to = [](const VideoSequence& v, std::size_t target) {
    VideoSequence out = v;
    out.frames.reserve(target);
    for (std::size_t k = v.length(); k < target; ++k)
      out.frames.push_back(v.frames[k % v.length()]);
    return out;
  };
  if (a.length() >= b.length()) return {a, cycle_to(b, a.length())};
  return {cycle_to(a, b.length()), b};
}

Matrix stage1_input(const Vidlet& vi, const Vidlet& vj) {
  if (vi.frames.size() != vj.frames.size()) {
    throw ValidationError("stage1_input: vidlets disagree on window length");
  }
  if (vi.frames.empty() || vi.frames[0].size() != vj.frames[0].size()) {
    throw ValidationError("stage1_input: vidlets disagree on frame dimension");
  }
  const std::size_t dim = vi.frames[0].size();
  const std::size_t cols = vi.frames.size();
  Matrix out(2 * dim, cols);
  for (std::size_t k = 0; k < cols; ++k) {
    for (std::size_t r = 0; r < dim; ++r) {
      out(r, k) = vi.frames[k][r];
      out(dim + r, k) = vj.frames[k][r];
    }
  }
  return out;
}

Matrix stage2_input(const Matrix& h, std::size_t z) {
  const std::size_t window = 2 * z + 1;
  if (h.cols() != window) {
    throw ValidationError("stage2_input: expected " + std::to_string(window) +
                          " encoding columns, got " + std::to_string(h.cols()));
  }
  const std::size_t dim = h.rows();
  Matrix out(2 * dim, 2 * z);
  std::size_t col = 0;
  for (std::size_t o = 0; o < window; ++o) {
    if (o == z) continue;  // skip the pivot itself
    for (std::size_t r = 0; r < dim; ++r) {
      out(r, col) = h(r, z);        // pivot on top
      out(dim + r, col) = h(r, o);  // neighbor below
    }
    ++col;
  }
  return out;
}

Matrix stage3_input(const Matrix& s2, std::size_t z) {
  if (s2.cols() != 2 * z) {
    throw ValidationError("stage3_input: expected " + std::to_string(2 * z) +
                          " columns, got " + std::to_string(s2.cols()));
  }
  Matrix out(s2.rows() * s2.cols(), 1);
  std::size_t r = 0;
  for (std::size_t c = 0; c < s2.cols(); ++c)
    for (std::size_t i = 0; i < s2.rows(); ++i) out(r++, 0) = s2(i, c);
  return out;
}

}  // namespace smnae
