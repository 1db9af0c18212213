#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "segnmt/checkpoint.hpp"
#include "test_util.hpp"

using namespace segnmt;

TEST(Checkpoint, RoundTripIsExactAfterRounding) {
  auto p = test::tiny_model(7, 9, 3);
  round_to_checkpoint_precision(p);
  std::stringstream buf;
  write_checkpoint(buf, p);
  auto q = read_checkpoint(buf);
  EXPECT_TRUE(p == q);
  EXPECT_EQ(q.dims, p.dims);
}

TEST(Checkpoint, HeaderLayout) {
  auto p = test::tiny_model(7, 9, 3, 5, 4);
  std::stringstream buf;
  write_checkpoint(buf, p);
  std::string bytes = buf.str();
  ASSERT_GE(bytes.size(), 32u);
  EXPECT_EQ(bytes.substr(0, 8), "SEGNMTCK");
  auto u32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int k = 3; k >= 0; --k) v = (v << 8) | static_cast<unsigned char>(bytes[off + k]);
    return v;
  };
  EXPECT_EQ(u32(8), kCheckpointVersion);
  EXPECT_EQ(u32(12), 4u);  // embedding
  EXPECT_EQ(u32(16), 5u);  // hidden
  EXPECT_EQ(u32(20), 7u);
  EXPECT_EQ(u32(24), 9u);
  EXPECT_EQ(u32(28), 19u);
  EXPECT_EQ(u32(32), 7u);  // strlen("src.emb")
  EXPECT_EQ(bytes.substr(36, 7), "src.emb");
}

TEST(Checkpoint, RejectsCorruptInput) {
  auto p = test::tiny_model(5, 5, 1);
  std::stringstream buf;
  write_checkpoint(buf, p);
  std::string bytes = buf.str();

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::stringstream a(bad_magic);
  EXPECT_THROW(read_checkpoint(a), std::exception);

  std::stringstream truncated(bytes.substr(0, bytes.size() / 2));
  EXPECT_THROW(read_checkpoint(truncated), std::exception);

  std::string bad_version = bytes;
  bad_version[8] = 9;
  std::stringstream c(bad_version);
  EXPECT_THROW(read_checkpoint(c), std::exception);
}

TEST(Checkpoint, FileRoundTripIsByteStable) {
  test::TempDir dir("ckpt");
  auto p = test::tiny_model(6, 8, 2);
  save_checkpoint(dir.path() / "a.ckpt", p);
  auto q = load_checkpoint(dir.path() / "a.ckpt");
  save_checkpoint(dir.path() / "b.ckpt", q);
  auto slurp = [](const std::filesystem::path& f) {
    std::ifstream in(f, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  EXPECT_EQ(slurp(dir.path() / "a.ckpt"), slurp(dir.path() / "b.ckpt"));
}
