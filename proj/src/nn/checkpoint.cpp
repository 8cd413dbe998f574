#include "cvo/nn/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <vector>

#include "json.hpp"

namespace cvo::nn {

namespace {

constexpr char kMagic[4] = {'C', 'V', 'O', 'K'};

void put_u64(std::vector<char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t get_u64(const std::vector<char>& in, std::size_t& pos) {
  if (pos + 8 > in.size()) throw std::runtime_error("checkpoint: truncated file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  pos += 8;
  return v;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  nlohmann::json header = {
      {"input_dim", ckpt.spec.input_dim},
      {"hidden", ckpt.spec.hidden},
      {"output_dim", ckpt.spec.output_dim},
      {"n_params", ckpt.params.values.size()},
      {"master_seed", ckpt.master_seed},
      {"lineage", ckpt.lineage},
      {"step", ckpt.step},
  };
  const std::string text = header.dump();

  std::vector<char> out(std::begin(kMagic), std::end(kMagic));
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (double v : ckpt.params.values) put_u64(out, std::bit_cast<std::uint64_t>(v));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint: cannot open " + path.string());
  const std::vector<char> in((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (in.size() < 12 || !std::equal(std::begin(kMagic), std::end(kMagic), in.begin()))
    throw std::runtime_error("checkpoint: bad magic in " + path.string());
  std::size_t pos = 4;
  const std::uint64_t header_len = get_u64(in, pos);
  if (pos + header_len > in.size()) throw std::runtime_error("checkpoint: truncated header");
  const auto header = nlohmann::json::parse(in.begin() + pos, in.begin() + pos + header_len);
  pos += header_len;

  Checkpoint ckpt;
  ckpt.spec.input_dim = header.at("input_dim").get<int>();
  ckpt.spec.hidden = header.at("hidden").get<std::vector<int>>();
  ckpt.spec.output_dim = header.at("output_dim").get<int>();
  ckpt.master_seed = header.at("master_seed").get<std::uint64_t>();
  ckpt.lineage = header.at("lineage").get<std::string>();
  ckpt.step = header.at("step").get<std::uint64_t>();
  ckpt.params = zero_params(ckpt.spec);
  if (header.at("n_params").get<std::size_t>() != ckpt.params.size())
    throw std::runtime_error("checkpoint: parameter count disagrees with spec");
  for (double& v : ckpt.params.values) v = std::bit_cast<double>(get_u64(in, pos));
  if (pos != in.size()) throw std::runtime_error("checkpoint: trailing bytes");
  return ckpt;
}

}  // namespace cvo::nn
