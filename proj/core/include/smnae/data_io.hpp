#ifndef SMNAE_DATA_IO_HPP
#define SMNAE_DATA_IO_HPP

#include <cstdint>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "smnae/matrix.hpp"
#include "smnae/vidlet.hpp"

namespace smnae {

struct PairRecord {
  std::string video_a;  // path relative to the data root
  std::string video_b;
  bool kin = false;
  std::string relation;  // empty when the pair list has no relation column
};

struct SyntheticConfig {
  std::size_t families = 20;
  std::size_t latent_dim = 8;
  std::size_t frame_dim = 256;  // flattened pixels; perfect squares are written square
  std::size_t frames_per_video = 10;
  double kin_noise = 0.05;   // member deviation from the family latent
  double nonkin_gap = 0.5;   // minimum latent distance between non-kin families
  double drift = 0.02;       // per-frame random-walk step in latent space
  Seed seed{0};

  void validate() const;
};

// 8-bit binary PGM (P5).
void write_pgm(const std::string& path, std::size_t width, std::size_t height,
               const std::vector<std::uint8_t>& pixels);
std::tuple<std::size_t, std::size_t, std::vector<std::uint8_t>> read_pgm(
    const std::string& path);

// Loads all .pgm frames of a directory in ascending filename order, scaled
// to [0, 1]. subject_id / family_id come from the last two path components.
VideoSequence load_video_dir(const std::string& dir);

// CSV with header video_a,video_b,label[,relation]; label is 1 (kin) / 0.
std::vector<PairRecord> load_pair_list(const std::string& path);

// Splits pairs so that no family appears on both sides. Pairs connect
// families into components; whole components are assigned to the test side
// until it holds about round(test_fraction * families) families.
std::pair<std::vector<PairRecord>, std::vector<PairRecord>> partition_subject_disjoint(
    const std::vector<PairRecord>& pairs, double test_fraction, Seed seed);

// Writes a synthetic kinship dataset under out_root:
//   out_root/f<family>/s<member>/frame_NNNN.pgm plus out_root/pairs.csv.
// Members of one family share a latent vector (kin pairs); non-kin pairs
// connect disjoint two-family blocks so that family-disjoint splits exist.
// Pure function of cfg: identical configs produce identical trees.
std::string gen_synthetic_kin(const SyntheticConfig& cfg, const std::string& out_root);

// IDX-format images + labels (the MNIST container layout). Images come back
// flattened to columns and scaled to [0, 1].
std::pair<Matrix, std::vector<int>> load_mnist_idx(const std::string& images_path,
                                                   const std::string& labels_path);

}  // namespace smnae

#endif
