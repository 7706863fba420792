#include "newsfdi/text.hpp"

#include <unicode/brkiter.h>
#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>
#include <unicode/utext.h>
#include <unicode/utf8.h>

#include <fstream>
#include <memory>
#include <stdexcept>

#include "newsfdi/error.hpp"

namespace newsfdi::text {
namespace {

std::unique_ptr<icu::BreakIterator> make_word_iterator() {
    UErrorCode status = U_ZERO_ERROR;
    std::unique_ptr<icu::BreakIterator> it(
        icu::BreakIterator::createWordInstance(icu::Locale::getRoot(), status));
    if (U_FAILURE(status) || !it) {
        throw std::runtime_error(std::string("ICU word iterator: ") + u_errorName(status));
    }
    return it;
}

// BreakIterator instances are not thread-safe; one per thread.
icu::BreakIterator& word_iterator() {
    thread_local std::unique_ptr<icu::BreakIterator> it = make_word_iterator();
    return *it;
}

bool dropped_code_point(UChar32 c) {
    const int8_t type = u_charType(c);
    return type == U_NON_SPACING_MARK || type == U_ENCLOSING_MARK || type == U_FORMAT_CHAR ||
           type == U_CONTROL_CHAR || u_ispunct(c) || u_isUWhiteSpace(c);
}

bool all_digits(const std::string& s) {
    if (s.empty()) return false;
    int32_t i = 0;
    const auto n = static_cast<int32_t>(s.size());
    while (i < n) {
        UChar32 c;
        U8_NEXT(s.data(), i, n, c);
        if (c < 0 || !u_isdigit(c)) return false;
    }
    return true;
}

}  // namespace

std::string normalize_word(std::string_view word) {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* nfd = icu::Normalizer2::getNFDInstance(status);
    const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status)) throw std::runtime_error(std::string("ICU normalizer: ") + u_errorName(status));

    icu::UnicodeString folded =
        icu::UnicodeString::fromUTF8(icu::StringPiece(word.data(), static_cast<int32_t>(word.size())));
    folded.foldCase();
    const icu::UnicodeString decomposed = nfd->normalize(folded, status);

    icu::UnicodeString kept;
    for (int32_t i = 0; i < decomposed.length();) {
        const UChar32 c = decomposed.char32At(i);
        if (!dropped_code_point(c)) kept.append(c);
        i += U16_LENGTH(c);
    }
    const icu::UnicodeString composed = nfc->normalize(kept, status);
    if (U_FAILURE(status)) throw std::runtime_error(std::string("ICU normalizer: ") + u_errorName(status));

    std::string out;
    composed.toUTF8String(out);
    return out;
}

std::vector<Word> segment(std::string_view utf8, const StopwordSet& stopwords) {
    std::vector<Word> words;
    if (utf8.empty()) return words;

    UErrorCode status = U_ZERO_ERROR;
    UText ut = UTEXT_INITIALIZER;
    utext_openUTF8(&ut, utf8.data(), static_cast<int64_t>(utf8.size()), &status);
    icu::BreakIterator& it = word_iterator();
    it.setText(&ut, status);
    if (U_FAILURE(status)) {
        utext_close(&ut);
        throw std::runtime_error(std::string("ICU segmentation: ") + u_errorName(status));
    }

    int32_t start = it.first();
    for (int32_t end = it.next(); end != icu::BreakIterator::DONE; start = end, end = it.next()) {
        const int32_t rule = it.getRuleStatus();
        if (rule < UBRK_WORD_NONE_LIMIT) continue;  // spaces, punctuation, symbols
        const auto b = static_cast<std::size_t>(start);
        const auto e = static_cast<std::size_t>(end);
        std::string token = normalize_word(utf8.substr(b, e - b));
        if (token.empty() || all_digits(token) || stopwords.contains(token)) continue;
        words.push_back(Word{std::move(token), Span{b, e}});
    }
    utext_close(&ut);
    return words;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read stopword file: " + path.string());
    StopwordSet out;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto last = line.find_last_not_of(" \t\r");
        std::string word = normalize_word(std::string_view(line).substr(first, last - first + 1));
        if (!word.empty()) out.insert(std::move(word));
    }
    return out;
}

std::vector<std::string> normalize_phrase(std::string_view phrase) {
    std::vector<std::string> out;
    for (auto& w : segment(phrase, {})) out.push_back(std::move(w.token));
    return out;
}

bool is_uppercase_at(std::string_view utf8, std::size_t offset) {
    if (offset >= utf8.size()) return false;
    auto i = static_cast<int32_t>(offset);
    UChar32 c;
    U8_NEXT(utf8.data(), i, static_cast<int32_t>(utf8.size()), c);
    return c >= 0 && u_isupper(c);
}

}  // namespace newsfdi::text
