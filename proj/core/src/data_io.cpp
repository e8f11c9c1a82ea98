#include "smnae/data_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "smnae/errors.hpp"

namespace fs = std::filesystem;

namespace smnae {

namespace {

std::string family_of(const std::string& rel_path) {
  const auto slash = rel_path.find_first_of("/\\");
  return slash == std::string::npos ? rel_path : rel_path.substr(0, slash);
}

int pgm_token(std::istream& in) {
  // Next integer token, skipping whitespace and '#' comments.
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF || !std::isdigit(c)) return -1;
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = in.get();
  }
  return value;
}

}  // namespace

void SyntheticConfig::validate() const {
  if (families < 2) throw ValidationError("SyntheticConfig: need at least 2 families");
  if (latent_dim < 1 || frame_dim < 1) throw ValidationError("SyntheticConfig: empty dims");
  if (frames_per_video < 1) throw ValidationError("SyntheticConfig: need frames");
  if (kin_noise < 0.0 || drift < 0.0) throw ValidationError("SyntheticConfig: negative noise");
  if (!(nonkin_gap > 0.0)) throw ValidationError("SyntheticConfig: nonkin_gap must be positive");
}

void write_pgm(const std::string& path, std::size_t width, std::size_t height,
               const std::vector<std::uint8_t>& pixels) {
  if (pixels.size() != width * height) {
    throw ValidationError("write_pgm: pixel count does not match dimensions");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ValidationError("write_pgm: cannot open " + path);
  out << "P5\n" << width << " " << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  if (!out) throw ValidationError("write_pgm: write failed: " + path);
}

std::tuple<std::size_t, std::size_t, std::vector<std::uint8_t>> read_pgm(
    const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("read_pgm: cannot open " + path);
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || m1 != '5') {
    throw ValidationError("read_pgm: not a binary PGM (P5) file: " + path);
  }
  const int width = pgm_token(in);
  const int height = pgm_token(in);
  const int maxval = pgm_token(in);
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 255) {
    throw ValidationError("read_pgm: bad header in " + path);
  }
  // The header ends with exactly one whitespace byte (already consumed by
  // the token reader stopping on it).
  std::vector<std::uint8_t> pixels(static_cast<std::size_t>(width) * height);
  in.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(pixels.size())) {
    throw ValidationError("read_pgm: truncated pixel data in " + path);
  }
  return {static_cast<std::size_t>(width), static_cast<std::size_t>(height),
          std::move(pixels)};
}

VideoSequence load_video_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw ValidationError("load_video_dir: not a directory: " + dir);
  }
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") {
      names.push_back(entry.path().filename().string());
    }
  }
  if (names.empty()) {
    throw ValidationError("load_video_dir: no .pgm frames in " + dir);
  }
  std::sort(names.begin(), names.end());

  VideoSequence video;
  std::size_t width = 0, height = 0;
  std::vector<std::string> offenders;
  for (const auto& name : names) {
    auto [w, h, pixels] = read_pgm((fs::path(dir) / name).string());
    if (video.frames.empty()) {
      width = w;
      height = h;
      video.frame_dim = w * h;
    } else if (w != width || h != height) {
      offenders.push_back(name);
      continue;
    }
    std::vector<double> frame(pixels.size());
    for (std::size_t i = 0; i < pixels.size(); ++i) frame[i] = pixels[i] / 255.0;
    video.frames.push_back(std::move(frame));
  }
  if (!offenders.empty()) {
    std::string msg = "load_video_dir: mixed frame dimensions in " + dir + ":";
    for (const auto& n : offenders) msg += " " + n;
    throw ValidationError(msg);
  }

  const fs::path p = fs::path(dir).lexically_normal();
  video.subject_id = p.filename().string();
  video.family_id = p.parent_path().filename().string();
  return video;
}

std::vector<PairRecord> load_pair_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("load_pair_list: cannot open " + path);

  std::string line;
  if (!std::getline(in, line)) throw ValidationError("load_pair_list: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  bool has_relation;
  if (line == "video_a,video_b,label") {
    has_relation = false;
  } else if (line == "video_a,video_b,label,relation") {
    has_relation = true;
  } else {
    throw ValidationError("load_pair_list: unexpected header '" + line + "' in " + path);
  }

  std::vector<PairRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    const std::size_t expected = has_relation ? 4 : 3;
    if (fields.size() != expected || fields[0].empty() || fields[1].empty()) {
      throw ValidationError("load_pair_list: malformed row at line " +
                            std::to_string(line_no) + " of " + path);
    }
    PairRecord rec;
    rec.video_a = fields[0];
    rec.video_b = fields[1];
    if (fields[2] == "1") {
      rec.kin = true;
    } else if (fields[2] == "0") {
      rec.kin = false;
    } else {
      throw ValidationError("load_pair_list: label must be 0 or 1 at line " +
                            std::to_string(line_no) + " of " + path);
    }
    if (has_relation) rec.relation = fields[3];
    records.push_back(std::move(rec));
  }
  return records;
}

std::pair<std::vector<PairRecord>, std::vector<PairRecord>> partition_subject_disjoint(
    const std::vector<PairRecord>& pairs, double test_fraction, Seed seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError("partition_subject_disjoint: test_fraction must be in (0, 1)");
  }
  if (pairs.empty()) throw ValidationError("partition_subject_disjoint: no pairs");

  // Families in order of first appearance.
  std::vector<std::string> families;
  auto family_index = [&](const std::string& f) {
    for (std::size_t i = 0; i < families.size(); ++i)
      if (families[i] == f) return i;
    families.push_back(f);
    return families.size() - 1;
  };

  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& p : pairs) {
    edges.emplace_back(family_index(family_of(p.video_a)), family_index(family_of(p.video_b)));
  }

  // Union-find over families; every pair must end up on one side, so its
  // whole component goes there.
  std::vector<std::size_t> parent(families.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto [a, b] : edges) parent[find(a)] = find(b);

  std::vector<std::size_t> comp_of(families.size());
  std::vector<std::vector<std::size_t>> components;
  {
    std::vector<long> comp_id(families.size(), -1);
    for (std::size_t i = 0; i < families.size(); ++i) {
      const std::size_t root = find(i);
      if (comp_id[root] < 0) {
        comp_id[root] = static_cast<long>(components.size());
        components.emplace_back();
      }
      comp_of[i] = static_cast<std::size_t>(comp_id[root]);
      components[comp_of[i]].push_back(i);
    }
  }

  // Deterministic shuffle of component order, then first-fit up to the
  // rounded family target.
  std::vector<std::size_t> order(components.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
    std::swap(order[i - 1], order[j]);
  }

  const std::size_t target =
      static_cast<std::size_t>(std::lround(test_fraction * static_cast<double>(families.size())));
  std::vector<bool> in_test(components.size(), false);
  std::size_t test_families = 0;
  for (std::size_t idx : order) {
    if (test_families + components[idx].size() <= target) {
      in_test[idx] = true;
      test_families += components[idx].size();
    }
  }

  std::vector<PairRecord> train, test;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    (in_test[comp_of[edges[k].first]] ? test : train).push_back(pairs[k]);
  }

  auto has_both = [](const std::vector<PairRecord>& v) {
    bool pos = false, neg = false;
    for (const auto& p : v) (p.kin ? pos : neg) = true;
    return pos && neg;
  };
  if (train.empty() || test.empty() || !has_both(train) || !has_both(test)) {
    throw ValidationError(
        "partition_subject_disjoint: cannot produce a family-disjoint split with at "
        "least one kin and one non-kin pair on each side");
  }
  return {std::move(train), std::move(test)};
}

std::string gen_synthetic_kin(const SyntheticConfig& cfg, const std::string& out_root) {
  cfg.validate();
  Rng rng(cfg.seed);

  // Shared projection from latent space to pixels.
  const double contrast = 0.35;
  std::vector<double> proj(cfg.frame_dim * cfg.latent_dim);
  for (double& v : proj) v = contrast * rng.normal() / std::sqrt(static_cast<double>(cfg.latent_dim));

  // Family latents; non-kin blocks (2i, 2i+1) must stay nonkin_gap apart.
  std::vector<std::vector<double>> latents(cfg.families, std::vector<double>(cfg.latent_dim));
  for (auto& l : latents)
    for (double& v : l) v = rng.normal();
  for (std::size_t b = 0; b + 1 < cfg.families; b += 2) {
    for (int attempt = 0; attempt < 100; ++attempt) {
      double dist = 0.0;
      for (std::size_t d = 0; d < cfg.latent_dim; ++d) {
        const double diff = latents[b][d] - latents[b + 1][d];
        dist += diff * diff;
      }
      if (std::sqrt(dist) >= cfg.nonkin_gap) break;
      for (double& v : latents[b + 1]) v = rng.normal();
      if (attempt == 99) {
        throw ValidationError("gen_synthetic_kin: cannot satisfy nonkin_gap");
      }
    }
  }

  fs::create_directories(out_root);
  char buf[64];
  const bool square = [&] {
    const auto edge = static_cast<std::size_t>(std::lround(std::sqrt(double(cfg.frame_dim))));
    return edge * edge == cfg.frame_dim;
  }();
  const std::size_t width = square ? static_cast<std::size_t>(std::lround(std::sqrt(double(cfg.frame_dim))))
                                   : cfg.frame_dim;
  const std::size_t height = square ? width : 1;

  for (std::size_t f = 0; f < cfg.families; ++f) {
    for (std::size_t s = 0; s < 2; ++s) {
      std::snprintf(buf, sizeof(buf), "f%03zu/s%02zu", f, s);
      const fs::path dir = fs::path(out_root) / buf;
      fs::create_directories(dir);

      std::vector<double> member(cfg.latent_dim);
      for (std::size_t d = 0; d < cfg.latent_dim; ++d)
        member[d] = latents[f][d] + cfg.kin_noise * rng.normal();

      std::vector<double> walk(cfg.latent_dim, 0.0);
      for (std::size_t t = 0; t < cfg.frames_per_video; ++t) {
        for (double& v : walk) v += cfg.drift * rng.normal();
        std::vector<std::uint8_t> pixels(cfg.frame_dim);
        for (std::size_t r = 0; r < cfg.frame_dim; ++r) {
          double acc = 0.5;
          for (std::size_t d = 0; d < cfg.latent_dim; ++d)
            acc += proj[r * cfg.latent_dim + d] * (member[d] + walk[d]);
          acc = std::min(1.0, std::max(0.0, acc));
          pixels[r] = static_cast<std::uint8_t>(std::lround(acc * 255.0));
        }
        std::snprintf(buf, sizeof(buf), "frame_%04zu.pgm", t + 1);
        write_pgm((dir / buf).string(), width, height, pixels);
      }
    }
  }

  const fs::path csv_path = fs::path(out_root) / "pairs.csv";
  std::ofstream csv(csv_path, std::ios::trunc);
  if (!csv) throw ValidationError("gen_synthetic_kin: cannot write " + csv_path.string());
  csv << "video_a,video_b,label\n";
  for (std::size_t f = 0; f < cfg.families; ++f) {
    std::snprintf(buf, sizeof(buf), "f%03zu/s00,f%03zu/s01,1", f, f);
    csv << buf << "\n";
  }
  for (std::size_t b = 0; b + 1 < cfg.families; b += 2) {
    for (std::size_t s = 0; s < 2; ++s) {
      std::snprintf(buf, sizeof(buf), "f%03zu/s%02zu,f%03zu/s%02zu,0", b, s, b + 1, s);
      csv << buf << "\n";
    }
  }
  return csv_path.string();
}

std::pair<Matrix, std::vector<int>> load_mnist_idx(const std::string& images_path,
                                                   const std::string& labels_path) {
  auto read_file = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("load_mnist_idx: cannot open " + path);
    return std::vector<unsigned char>((std::istreambuf_iterator<char>(in)),
                                      std::istreambuf_iterator<char>());
  };
  auto be32 = [](const std::vector<unsigned char>& b, std::size_t off) {
    return (std::uint32_t(b[off]) << 24) | (std::uint32_t(b[off + 1]) << 16) |
           (std::uint32_t(b[off + 2]) << 8) | std::uint32_t(b[off + 3]);
  };

  const auto img = read_file(images_path);
  if (img.size() < 16 || be32(img, 0) != 0x00000803u) {
    throw ValidationError("load_mnist_idx: bad image magic in " + images_path);
  }
  const std::size_t count = be32(img, 4);
  const std::size_t rows = be32(img, 8);
  const std::size_t cols = be32(img, 12);
  const std::size_t expected = 16 + count * rows * cols;
  if (img.size() != expected) {
    throw ValidationError("load_mnist_idx: " + images_path + " has " +
                          std::to_string(img.size()) + " bytes, expected " +
                          std::to_string(expected));
  }

  const auto lab = read_file(labels_path);
  if (lab.size() < 8 || be32(lab, 0) != 0x00000801u) {
    throw ValidationError("load_mnist_idx: bad label magic in " + labels_path);
  }
  const std::size_t lab_count = be32(lab, 4);
  if (lab.size() != 8 + lab_count) {
    throw ValidationError("load_mnist_idx: " + labels_path + " has " +
                          std::to_string(lab.size()) + " bytes, expected " +
                          std::to_string(8 + lab_count));
  }
  if (lab_count != count) {
    throw ValidationError("load_mnist_idx: image/label counts differ (" +
                          std::to_string(count) + " vs " + std::to_string(lab_count) + ")");
  }

  const std::size_t dim = rows * cols;
  Matrix x(dim, count);
  for (std::size_t i = 0; i < count; ++i)
    for (std::size_t r = 0; r < dim; ++r) x(r, i) = img[16 + i * dim + r] / 255.0;
  std::vector<int> y(count);
  for (std::size_t i = 0; i < count; ++i) {
    y[i] = lab[8 + i];
    if (y[i] > 9) throw ValidationError("load_mnist_idx: label out of range");
  }
  return {std::move(x), std::move(y)};
}

}  // namespace smnae
