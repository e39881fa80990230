#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <random>
#include <string>

#include "stegokit/errors.hpp"
#include "stegokit/otstego.hpp"

using namespace stegokit;

TEST_CASE("parameter derivation, hand-checked instances") {
    SUBCASE("nu=16 c=1 on a 1-bit full-entropy channel") {
        ParamSet p = derive_params(16, 1, 1.0, 1);
        CHECK(p.block_bits == 4);
        CHECK(p.ell == 4);
        CHECK(p.eps_sec == doctest::Approx(0.0009765625)); // 1/(4*2^(2*4)) = 2^-10
        CHECK(p.rho == 128);                               // 2*4*2^4
        CHECK(p.extractor.k == 24);                        // 4 + 2*10
        CHECK(p.t == 24);
        CHECK(p.extractor.n == 24);
        CHECK(p.extractor.m == 4);
        CHECK(p.extractor.d == 27);
        CHECK(p.total_symbols() == 96);
        p.validate();
    }
    SUBCASE("nu=2 c=1 with explicit eps and rho") {
        ParamSet p = derive_params(2, 1, 1.0, 1, 0.0625, 8);
        CHECK(p.block_bits == 1);
        CHECK(p.ell == 2);
        CHECK(p.rho == 8);
        CHECK(p.extractor.k == 9); // 1 + 2*4
        CHECK(p.t == 9);
        CHECK(p.extractor.d == 9);
        p.validate();
    }
    SUBCASE("nu=8 c=1 defaults") {
        ParamSet p = derive_params(8, 1, 1.0, 1);
        CHECK(p.block_bits == 3);
        CHECK(p.ell == 3);
        CHECK(p.eps_sec == doctest::Approx(1.0 / 256));
        CHECK(p.rho == 48);
        CHECK(p.t == 19);
        p.validate();
    }
    SUBCASE("c=4 default collapses small messages to one block") {
        ParamSet p = derive_params(16, 4, 1.0, 1);
        CHECK(p.block_bits == 16);
        CHECK(p.ell == 1);
        CHECK(p.rho == 2097152); // 2*16*2^16
        CHECK(p.extractor.k == 84);
        CHECK(p.t == 84);
        p.validate();
    }
    SUBCASE("low-entropy channel stretches the block") {
        ParamSet p = derive_params(4, 1, 0.7, 1); // eta=2, eps=2^-6, k=14
        CHECK(p.block_bits == 2);
        CHECK(p.ell == 2);
        CHECK(p.t == 20); // ceil(14 / 0.7)
        CHECK(p.delta == doctest::Approx(0.7));
        p.validate();
    }
    SUBCASE("padding appears when eta does not divide nu") {
        ParamSet p = derive_params(8, 2, 1.0, 1); // eta=6, ell=2, 4 bits padded
        CHECK(p.block_bits == 6);
        CHECK(p.ell == 2);
        CHECK(p.ell * p.block_bits - p.nu == 4);
        p.validate();
    }
    SUBCASE("rejected inputs") {
        CHECK_THROWS_AS(derive_params(1, 1, 1.0, 1), input_error);
        CHECK_THROWS_AS(derive_params(16, 0, 1.0, 1), input_error);
        CHECK_THROWS_AS(derive_params(16, 1, 0.0, 1), input_error);
        CHECK_THROWS_AS(derive_params(16, 1, 1.0, 1, 1.5, std::nullopt), input_error);
        CHECK_THROWS_AS(derive_params(16, 1, 1.0, 1, std::nullopt, -1LL), input_error);
        // eta = c * ceil(log2 nu) beyond the 56-bit packing limit
        CHECK_THROWS_AS(derive_params(1 << 20, 4, 1.0, 1), cap_error);
    }
}

TEST_CASE("keygen draws otp then seed, reproducibly") {
    ParamSet p = derive_params(8, 1, 1.0, 1);
    std::mt19937_64 rng1(7), rng2(7);
    StegoKey k1 = keygen(p, rng1);
    StegoKey k2 = keygen(p, rng2);
    CHECK(k1.otp.size() == 8);
    CHECK(k1.seed.size() == std::size_t(p.extractor.d));
    CHECK(k1.otp == k2.otp);
    CHECK(k1.seed == k2.seed);
    std::mt19937_64 rng3(8);
    StegoKey k3 = keygen(p, rng3);
    CHECK((k3.otp != k1.otp || k3.seed != k1.seed));
}

TEST_CASE("block input bits pack symbol bits in transmission order") {
    // b=2 symbols (3, 1): bits (1,1) then (1,0) -> value 0b0111
    CHECK(block_input_bits({3, 1}, 2).to_u64() == 7);
    CHECK(block_input_bits({1, 0, 1}, 1).to_u64() == 5);
    CHECK(block_input_bits({2}, 2).to_u64() == 2);
}

TEST_CASE("the block map is the extractor under the key seed") {
    ParamSet p = derive_params(4, 1, 1.3, 2); // quad channel: b=2
    std::mt19937_64 rng(3);
    StegoKey key = keygen(p, rng);
    BlockMap f = extractor_block_map(p, key.seed);
    std::vector<int> block;
    for (int i = 0; i < p.t; ++i)
        block.push_back(int(rng() & 3));
    BitVec x = block_input_bits(block, p.b);
    CHECK(f(block) == extract(p.extractor, key.seed, x).to_u64());
}

TEST_CASE("encode-decode round trip on the uniform channel") {
    ChannelModel c = ChannelModel::load_file("data/binary_uniform.json");
    ParamSet p = derive_params(8, 1, 1.0, 1);
    std::mt19937_64 rng(41);
    StegoKey key = keygen(p, rng);
    BitVec msg = BitVec::from_bits_string("10110010");
    History h;
    std::vector<long long> rounds;
    Stegotext st = se_encode(key, msg, c, h, rng, &rounds);
    CHECK(st.symbols.size() == std::size_t(p.total_symbols()));
    CHECK(h.size() == st.symbols.size()); // history advanced by the transcript
    CHECK(rounds.size() == std::size_t(p.ell));
    for (long long r : rounds)
        CHECK(r <= p.rho + 1);
    CHECK(sd_decode(key, st) == msg);
}

TEST_CASE("round trip with a padded final block") {
    ChannelModel c = ChannelModel::load_file("data/binary_uniform.json");
    ParamSet p = derive_params(8, 2, 1.0, 1); // eta=6, ell=2, 4 padded bits
    std::mt19937_64 rng(43);
    StegoKey key = keygen(p, rng);
    BitVec msg = BitVec::from_bits_string("01101001");
    History h;
    Stegotext st = se_encode(key, msg, c, h, rng);
    BitVec back = sd_decode(key, st);
    CHECK(back.size() == 8); // truncated to nu, padding stripped
    CHECK(back == msg);
}

TEST_CASE("round trip over the markov channel with prior history") {
    ChannelModel c = ChannelModel::load_file("data/markov_ab.json");
    ParamSet p = derive_params(4, 1, 0.7, 1);
    std::mt19937_64 rng(47);
    StegoKey key = keygen(p, rng);
    BitVec msg = BitVec::from_bits_string("1101");
    History h{1, 0, 1};
    Stegotext st = se_encode(key, msg, c, h, rng);
    CHECK(h.size() == 3 + st.symbols.size());
    CHECK(sd_decode(key, st) == msg);
}

TEST_CASE("encoding is deterministic under a fixed generator") {
    ChannelModel c = ChannelModel::load_file("data/binary_uniform.json");
    ParamSet p = derive_params(8, 1, 1.0, 1);
    std::mt19937_64 kg(5);
    StegoKey key = keygen(p, kg);
    BitVec msg = BitVec::from_bits_string("11110000");
    History h1, h2;
    std::mt19937_64 r1(99), r2(99);
    Stegotext s1 = se_encode(key, msg, c, h1, r1);
    Stegotext s2 = se_encode(key, msg, c, h2, r2);
    CHECK(s1.symbols == s2.symbols);
}

TEST_CASE("channel compatibility is enforced at encode time") {
    std::mt19937_64 rng(1);
    BitVec msg = BitVec::from_bits_string("1011");
    History h;
    // key derived for 1 bit per symbol cannot run on a 2-bit alphabet
    ChannelModel quad = ChannelModel::load_file("data/quad_biased.json");
    ParamSet p1 = derive_params(4, 1, 1.0, 1);
    StegoKey k1 = keygen(p1, rng);
    CHECK_THROWS_AS(se_encode(k1, msg, quad, h, rng), mismatch_error);
    // key demanding delta=1 cannot run on the 0.7-entropy markov channel
    ChannelModel mk = ChannelModel::load_file("data/markov_ab.json");
    CHECK_THROWS_AS(se_encode(k1, msg, mk, h, rng), mismatch_error);
    // message length must equal nu exactly
    ChannelModel ok = ChannelModel::load_file("data/binary_uniform.json");
    CHECK_THROWS_AS(se_encode(k1, BitVec::from_bits_string("101"), ok, h, rng), input_error);
    CHECK_THROWS_AS(se_encode(k1, BitVec(), ok, h, rng), input_error);
}

TEST_CASE("key files round-trip exactly") {
    ParamSet p = derive_params(8, 1, 1.0, 1);
    std::mt19937_64 rng(7);
    StegoKey key = keygen(p, rng);
    std::string text = key_to_text(key);
    CHECK(text.substr(0, 15) == "stegokit-key v1");
    StegoKey back = key_from_text(text);
    CHECK(back.otp == key.otp);
    CHECK(back.seed == key.seed);
    CHECK(back.params.nu == 8);
    CHECK(back.params.rho == key.params.rho);
    CHECK(back.params.t == key.params.t);
    CHECK(key_to_text(back) == text);

    // explicit eps/rho overrides survive the round trip
    ParamSet p2 = derive_params(2, 1, 1.0, 1, 0.0625, 8);
    StegoKey key2 = keygen(p2, rng);
    StegoKey back2 = key_from_text(key_to_text(key2));
    CHECK(back2.params.eps_sec == doctest::Approx(0.0625));
    CHECK(back2.params.rho == 8);
    CHECK(back2.params.t == 9);
}

TEST_CASE("malformed key files are rejected") {
    CHECK_THROWS_AS(key_from_text(""), input_error);
    CHECK_THROWS_AS(key_from_text("not a key\n"), input_error);
    ParamSet p = derive_params(8, 1, 1.0, 1);
    std::mt19937_64 rng(7);
    std::string good = key_to_text(keygen(p, rng));
    // truncating the seed line breaks the bit-length check
    std::string cut = good.substr(0, good.rfind('=') + 1) + "ff\n";
    CHECK_THROWS_AS(key_from_text(cut), input_error);
    CHECK_THROWS_AS(load_key("data/no_such_key.txt"), input_error);
}

TEST_CASE("stegotext files hold one space-separated symbol line") {
    ChannelModel c = ChannelModel::load_file("data/binary_uniform.json");
    ParamSet p = derive_params(2, 1, 1.0, 1, 0.0625, 8);
    std::mt19937_64 rng(11);
    StegoKey key = keygen(p, rng);
    History h;
    Stegotext st = se_encode(key, BitVec::from_bits_string("10"), c, h, rng);
    std::string text = stegotext_to_text(st, c);
    Stegotext back = stegotext_from_text(text, c, p);
    CHECK(back.symbols == st.symbols);
    CHECK(back.ell == p.ell);
    CHECK(back.t == p.t);

    CHECK_THROWS_AS(stegotext_from_text("a b a\n", c, p), mismatch_error);
    CHECK_THROWS_AS(stegotext_from_text(text + " a", c, p), mismatch_error);
    std::string bad = text;
    bad.replace(bad.find('a'), 1, "q");
    CHECK_THROWS_AS(stegotext_from_text(bad, c, p), mismatch_error);
}

TEST_CASE("decode rejects transcripts of the wrong shape") {
    ChannelModel c = ChannelModel::load_file("data/binary_uniform.json");
    ParamSet p = derive_params(2, 1, 1.0, 1, 0.0625, 8);
    std::mt19937_64 rng(13);
    StegoKey key = keygen(p, rng);
    History h;
    Stegotext st = se_encode(key, BitVec::from_bits_string("01"), c, h, rng);
    Stegotext cut = st;
    cut.symbols.pop_back();
    CHECK_THROWS_AS(sd_decode(key, cut), mismatch_error);
}

TEST_CASE("decode never fails structurally on plain covertext") {
    // feeding random channel output to the decoder yields some message
    ChannelModel c = ChannelModel::load_file("data/binary_uniform.json");
    ParamSet p = derive_params(8, 1, 1.0, 1);
    std::mt19937_64 rng(17);
    StegoKey key = keygen(p, rng);
    Stegotext fake;
    fake.ell = p.ell;
    fake.t = p.t;
    fake.symbols = c.sample_block({}, p.total_symbols(), rng);
    BitVec out = sd_decode(key, fake);
    CHECK(out.size() == 8);
}
