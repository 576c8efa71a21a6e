#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace erie {

struct PcmBuffer {
    std::vector<double> left;
    std::vector<double> right;
    int sampleRate = 44100;

    std::size_t frames() const { return left.size(); }
    double duration() const {
        return sampleRate > 0 ? static_cast<double>(left.size()) / sampleRate : 0.0;
    }
};

enum class WavFormat { Pcm16, Float32 };

struct WavWriteReport {
    std::size_t clippedSamples = 0;  // samples outside [-1, 1] clamped at write-out
};

WavWriteReport write_wav(const PcmBuffer& buffer, const std::string& path,
                         WavFormat format = WavFormat::Pcm16);
std::vector<std::uint8_t> encode_wav(const PcmBuffer& buffer, WavFormat format,
                                     WavWriteReport* report = nullptr);

PcmBuffer read_wav(const std::string& path);
PcmBuffer decode_wav(const std::uint8_t* data, std::size_t size);

}  // namespace erie
