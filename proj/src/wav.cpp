#include "erie/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "erie/error.hpp"

namespace erie {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xff));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
    out.insert(out.end(), tag, tag + 4);
}

std::uint32_t read_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const std::uint8_t* p) {
    return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

std::vector<std::uint8_t> encode_wav(const PcmBuffer& buffer, WavFormat format,
                                     WavWriteReport* report) {
    if (buffer.left.size() != buffer.right.size())
        throw Error(Error::Kind::Render, "pcm channel lengths differ");
    const std::uint16_t channels = 2;
    const std::uint16_t bytesPerSample = format == WavFormat::Pcm16 ? 2 : 4;
    const std::uint32_t frames = static_cast<std::uint32_t>(buffer.frames());
    const std::uint32_t dataSize = frames * channels * bytesPerSample;
    const bool isFloat = format == WavFormat::Float32;
    const std::uint32_t fmtSize = 16;
    const std::uint32_t factSize = isFloat ? 12 : 0;  // fact chunk for float WAVs
    const std::uint32_t riffSize = 4 + (8 + fmtSize) + factSize + (8 + dataSize);

    std::vector<std::uint8_t> out;
    out.reserve(8 + riffSize);
    put_tag(out, "RIFF");
    put_u32(out, riffSize);
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, fmtSize);
    put_u16(out, isFloat ? 3 : 1);  // IEEE float / PCM
    put_u16(out, channels);
    put_u32(out, static_cast<std::uint32_t>(buffer.sampleRate));
    put_u32(out, static_cast<std::uint32_t>(buffer.sampleRate) * channels * bytesPerSample);
    put_u16(out, channels * bytesPerSample);
    put_u16(out, bytesPerSample * 8);
    if (isFloat) {
        put_tag(out, "fact");
        put_u32(out, 4);
        put_u32(out, frames);
    }
    put_tag(out, "data");
    put_u32(out, dataSize);

    std::size_t clipped = 0;
    auto clamp_count = [&clipped](double v) {
        if (v > 1.0) {
            ++clipped;
            return 1.0;
        }
        if (v < -1.0) {
            ++clipped;
            return -1.0;
        }
        return v;
    };

    for (std::uint32_t i = 0; i < frames; ++i) {
        for (int ch = 0; ch < 2; ++ch) {
            double v = clamp_count(ch == 0 ? buffer.left[i] : buffer.right[i]);
            if (isFloat) {
                float f = static_cast<float>(v);
                std::uint32_t bits;
                std::memcpy(&bits, &f, sizeof(bits));
                put_u32(out, bits);
            } else {
                int s = static_cast<int>(std::lrint(v * 32767.0));
                s = std::clamp(s, -32768, 32767);
                put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(s)));
            }
        }
    }
    if (report) report->clippedSamples = clipped;
    return out;
}

WavWriteReport write_wav(const PcmBuffer& buffer, const std::string& path, WavFormat format) {
    WavWriteReport report;
    auto bytes = encode_wav(buffer, format, &report);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Error::Kind::Io, "cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Error::Kind::Io, "failed writing " + path);
    return report;
}

PcmBuffer decode_wav(const std::uint8_t* data, std::size_t size) {
    if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 || std::memcmp(data + 8, "WAVE", 4) != 0)
        throw Error(Error::Kind::Io, "not a RIFF/WAVE file");

    PcmBuffer out;
    std::uint16_t audioFormat = 0, channels = 0, bits = 0;
    const std::uint8_t* samples = nullptr;
    std::uint32_t dataSize = 0;

    std::size_t pos = 12;
    while (pos + 8 <= size) {
        const std::uint8_t* chunk = data + pos;
        std::uint32_t chunkSize = read_u32(chunk + 4);
        const std::uint8_t* body = chunk + 8;
        if (pos + 8 + chunkSize > size)
            chunkSize = static_cast<std::uint32_t>(size - pos - 8);
        if (std::memcmp(chunk, "fmt ", 4) == 0 && chunkSize >= 16) {
            audioFormat = read_u16(body);
            channels = read_u16(body + 2);
            out.sampleRate = static_cast<int>(read_u32(body + 4));
            bits = read_u16(body + 14);
        } else if (std::memcmp(chunk, "data", 4) == 0) {
            samples = body;
            dataSize = chunkSize;
        }
        pos += 8 + chunkSize + (chunkSize & 1);
    }
    if (!samples && dataSize == 0) {
        // a zero-length data chunk is a valid (empty) file
        bool sawData = false;
        pos = 12;
        while (pos + 8 <= size) {
            if (std::memcmp(data + pos, "data", 4) == 0) sawData = true;
            pos += 8 + read_u32(data + pos + 4) + (read_u32(data + pos + 4) & 1);
        }
        if (!sawData) throw Error(Error::Kind::Io, "WAV has no data chunk");
    }
    if (channels == 0 || (audioFormat != 1 && audioFormat != 3))
        throw Error(Error::Kind::Io, "unsupported WAV format (need PCM16 or float32)");

    std::uint32_t bytesPer = bits / 8;
    if ((audioFormat == 1 && bits != 16) || (audioFormat == 3 && bits != 32))
        throw Error(Error::Kind::Io, "unsupported WAV bit depth");
    std::uint32_t frames = bytesPer && channels ? dataSize / (bytesPer * channels) : 0;

    out.left.resize(frames);
    out.right.resize(frames);
    for (std::uint32_t i = 0; i < frames; ++i) {
        for (int ch = 0; ch < std::min<int>(channels, 2); ++ch) {
            const std::uint8_t* p = samples + (i * channels + ch) * bytesPer;
            double v;
            if (audioFormat == 1) {
                std::int16_t s = static_cast<std::int16_t>(read_u16(p));
                v = static_cast<double>(s) / 32767.0;
            } else {
                std::uint32_t bitsv = read_u32(p);
                float f;
                std::memcpy(&f, &bitsv, sizeof(f));
                v = f;
            }
            if (ch == 0) out.left[i] = v;
            if (ch == 1 || channels == 1) out.right[i] = v;
        }
        if (channels == 1) out.right[i] = out.left[i];
    }
    return out;
}

PcmBuffer read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Error::Kind::Io, "cannot open WAV file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_wav(bytes.data(), bytes.size());
}

}  // namespace erie
