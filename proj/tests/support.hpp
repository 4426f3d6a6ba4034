#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

#include <unistd.h>

namespace testsupport {

inline std::filesystem::path make_temp_dir(std::string_view tag) {
    static std::atomic<unsigned> counter{0};
    auto dir = std::filesystem::temp_directory_path() /
               ("distill_" + std::string(tag) + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter.fetch_add(1)));
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

// Three reference model outputs for the wire-cutting question
// (4 feet = 48 inches cut into 8 pieces, gold answer 6).

// Correct and concise, boxed result but no think/answer tags.
inline constexpr std::string_view kSamplePlainBoxed = R"(Analyze the problem and let's think step-by-step before answering it. Give the final answer (value) in \boxed{} notation.

To solve this problem, follow these steps:

Step 1: Convert the length of the wire from feet to inches.
There are 12 inches in one foot. So, 4 feet * 12 inches/foot = 48 inches.

Step 2: Divide the total length by the number of pieces Tracy obtained.
She got 8 pieces out of the 48-inch wire. To find the length of each piece, divide the total length by the number of pieces: 48 inches / 8 pieces = 6 inches.

So, each piece of wire was 6 inches long. The final answer is $\boxed{6}$.)";

// Correct value but the closing tag block repeats verbatim.
inline const std::string kSampleRepeatingTags = []() {
    std::string text =
        "First, let's convert the length of the wire from feet to inches since the final "
        "requirement is in inches. There are 12 inches in a foot, so 4 feet is equal to "
        "$4 \\times 12 = 48$ inches.\n\n"
        "Next, we need to determine how many inches each of the 8 pieces will be. We do this "
        "by dividing the total length of the wire in inches by the number of pieces:\n\n"
        "$\\text{Length of each piece} = \\frac{48 \\text{ inches}}{8} = 6 \\text{ inches}$\n\n"
        "Thus, each piece of wire is 6 inches long.\n\n";
    for (int i = 0; i < 4; ++i)
        text += "<answer>\nEach piece of wire is $\\boxed{6}$ inches long.\n</answer>\n</think>\n";
    return text;
}();

// Wrong arithmetic: converts and divides in the wrong order.
inline constexpr std::string_view kSampleWrongConversion = R"(First, let's break down the problem step-by-step:

1. We know that Tracy used a piece of wire 4 feet long.
2. This piece of wire was cut into 8 smaller pieces.
3. We need to find out how many inches each piece is.

Step 1: Convert the length of the wire from feet to inches.
Since there are 12 inches in a foot, we can multiply the length of the wire by 12 to get the length in inches.

Step 2: Divide the total length of the wire in inches by the number of pieces to find the length of each piece.

length_in_feet = 4
length_in_inches = length_in_feet * 12
number_of_pieces = 8
length_per_piece = length_in_inches / number_of_pieces

Each piece of wire is $\boxed{60}$ inches long.)";

} // namespace testsupport
