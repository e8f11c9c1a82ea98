#ifndef SMNAE_VIDLET_HPP
#define SMNAE_VIDLET_HPP

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "smnae/matrix.hpp"

namespace smnae {

// Sequence of flattened grayscale frames, pixel values in [0, 1].
struct VideoSequence {
  std::vector<std::vector<double>> frames;
  std::size_t frame_dim = 0;
  std::string subject_id;
  std::string family_id;

  std::size_t length() const { return frames.size(); }
  void validate() const;
};

// Non-overlapping window of 2z+1 consecutive frames centered on a pivot.
struct Vidlet {
  std::vector<std::vector<double>> frames;  // exactly 2z+1 entries
  std::size_t pivot_index = 0;              // z, position of the pivot within the window
  std::size_t source_offset = 0;            // index of the first frame in the parent video

  std::size_t half_width() const { return pivot_index; }
};

// Consecutive non-overlapping (2z+1)-frame windows from frame 0; a trailing
// remainder shorter than a full window is discarded. Throws when the video
// has fewer than 2z+1 frames (cycle the frames first).
std::vector<Vidlet> extract_vidlets(const VideoSequence& video, std::size_t z);

// Repeats the shorter video's frames cyclically from its start until both
// lengths match; the longer video is returned unchanged.
std::pair<VideoSequence, VideoSequence> cycle_align(const VideoSequence& a,
                                                    const VideoSequence& b);

// Column k is [frame k of vi ; frame k of vj]: 2*frame_dim rows, 2z+1 columns.
Matrix stage1_input(const Vidlet& vi, const Vidlet& vj);

// Pairs the pivot encoding with each neighbor encoding. h holds one column
// per frame pair (2z+1 columns, pivot at column z); the result has 2z
// columns, column o = [h_pivot ; h_neighbor_o], neighbors in frame order.
Matrix stage2_input(const Matrix& h, std::size_t z);

// Stacks the 2z stage-two encodings into one column of height 2z * rows(s2).
Matrix stage3_input(const Matrix& s2, std::size_t z);

}  // namespace smnae

#endif
