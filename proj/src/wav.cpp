#include "eyetap/signal.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

namespace eyetap {
namespace {

template <typename T>
T read_le(const unsigned char* p) {
    T v{};
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(p[i]) << (8 * i));
    return v;
}

template <typename T>
void put_le(std::ofstream& out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

}  // namespace

std::vector<AudioFrame> read_wav(const std::string& path, Millis chunk_ms) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open WAV file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
        std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
        throw InvalidInput("not a RIFF/WAVE file: " + path);
    }

    int channels = 0, rate = 0, bits = 0, format = 0;
    const unsigned char* data = nullptr;
    std::size_t data_len = 0;
    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const auto len = read_le<std::uint32_t>(&bytes[pos + 4]);
        const unsigned char* body = &bytes[pos + 8];
        if (pos + 8 + len > bytes.size()) throw InvalidInput("truncated WAV chunk in " + path);
        if (std::memcmp(&bytes[pos], "fmt ", 4) == 0 && len >= 16) {
            format = read_le<std::uint16_t>(body);
            channels = read_le<std::uint16_t>(body + 2);
            rate = static_cast<int>(read_le<std::uint32_t>(body + 4));
            bits = read_le<std::uint16_t>(body + 14);
            if (format == 0xFFFE && len >= 26) format = read_le<std::uint16_t>(body + 24);
        } else if (std::memcmp(&bytes[pos], "data", 4) == 0) {
            data = body;
            data_len = len;
        }
        pos += 8 + len + (len & 1);
    }
    if (format != 3 || bits != 32 || channels != 1)
        throw InvalidInput("WAV must be 32-bit float mono: " + path);
    if (!data || rate <= 0) throw InvalidInput("WAV has no data chunk: " + path);

    const std::size_t n = data_len / 4;
    const auto chunk = static_cast<std::size_t>(std::max<Millis>(1, chunk_ms * rate / 1000));
    std::vector<AudioFrame> frames;
    for (std::size_t start = 0; start < n; start += chunk) {
        AudioFrame f;
        f.sample_rate = rate;
        f.t_start = static_cast<Millis>(start) * 1000 / rate;
        const std::size_t end = std::min(n, start + chunk);
        f.samples.reserve(end - start);
        for (std::size_t i = start; i < end; ++i) {
            const auto bits32 = read_le<std::uint32_t>(data + 4 * i);
            float v;
            std::memcpy(&v, &bits32, 4);
            f.samples.push_back(std::clamp(v, -1.0f, 1.0f));
        }
        frames.push_back(std::move(f));
    }
    return frames;
}

void write_wav(const std::string& path, std::span<const AudioFrame> frames) {
    const int rate = frames.empty() ? 16000 : frames.front().sample_rate;
    std::size_t n = 0;
    for (const auto& f : frames) {
        if (f.sample_rate != rate) throw InvalidInput("write_wav: mixed sample rates");
        n += f.samples.size();
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write WAV file: " + path);
    const auto data_len = static_cast<std::uint32_t>(n * 4);
    out.write("RIFF", 4);
    put_le<std::uint32_t>(out, 36 + data_len);
    out.write("WAVEfmt ", 8);
    put_le<std::uint32_t>(out, 16);
    put_le<std::uint16_t>(out, 3);
    put_le<std::uint16_t>(out, 1);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(rate));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(rate * 4));
    put_le<std::uint16_t>(out, 4);
    put_le<std::uint16_t>(out, 32);
    out.write("data", 4);
    put_le<std::uint32_t>(out, data_len);
    for (const auto& f : frames) {
        for (float v : f.samples) {
            std::uint32_t b;
            std::memcpy(&b, &v, 4);
            put_le<std::uint32_t>(out, b);
        }
    }
}

}  // namespace eyetap
