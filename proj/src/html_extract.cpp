// Readability-style main-content extraction: a tolerant HTML tree builder,
// boilerplate pruning by tag and class/id hints, paragraph-based candidate
// scoring with a link-density penalty, and a text renderer that keeps
// headings, paragraphs and preformatted blocks in document order.

#include "aeas/prefilter.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <regex>
#include <unordered_set>

namespace aeas {

namespace {

struct Node {
    std::string tag; // empty for text nodes
    std::string text;
    std::map<std::string, std::string> attrs;
    std::vector<std::size_t> children;
    std::size_t parent = 0;
    bool removed = false;
};

constexpr std::size_t kRoot = 0;

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

void append_utf8(std::string& out, unsigned long cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x110000) {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string decode_entities(std::string_view s) {
    static const std::map<std::string, std::string, std::less<>> named{
        {"amp", "&"},       {"lt", "<"},         {"gt", ">"},       {"quot", "\""},
        {"apos", "'"},      {"nbsp", " "},       {"copy", "©"}, {"reg", "®"},
        {"mdash", "—"}, {"ndash", "–"}, {"hellip", "…"}, {"laquo", "«"},
        {"raquo", "»"}, {"rsquo", "’"}, {"lsquo", "‘"}, {"rdquo", "”"},
        {"ldquo", "“"}, {"middot", "·"}, {"bull", "•"}};
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] != '&') {
            out.push_back(s[i]);
            continue;
        }
        const auto semi = s.find(';', i + 1);
        if (semi == std::string_view::npos || semi - i > 12) {
            out.push_back('&');
            continue;
        }
        const std::string_view name = s.substr(i + 1, semi - i - 1);
        if (!name.empty() && name[0] == '#') {
            unsigned long cp = 0;
            bool ok = name.size() > 1;
            const bool hex = ok && (name[1] == 'x' || name[1] == 'X');
            for (std::size_t k = hex ? 2 : 1; ok && k < name.size(); ++k) {
                const char c = name[k];
                if (hex && std::isxdigit(static_cast<unsigned char>(c))) {
                    cp = cp * 16 + static_cast<unsigned long>(
                                       std::isdigit(static_cast<unsigned char>(c))
                                           ? c - '0'
                                           : std::tolower(static_cast<unsigned char>(c)) - 'a' + 10);
                } else if (!hex && std::isdigit(static_cast<unsigned char>(c))) {
                    cp = cp * 10 + static_cast<unsigned long>(c - '0');
                } else {
                    ok = false;
                }
            }
            if (ok && (!hex || name.size() > 2)) {
                append_utf8(out, cp);
                i = semi;
                continue;
            }
        } else if (const auto it = named.find(name); it != named.end()) {
            out += it->second;
            i = semi;
            continue;
        }
        out.push_back('&');
    }
    return out;
}

const std::unordered_set<std::string> kVoid{"area", "base", "br",   "col",   "embed",
                                            "hr",   "img",  "input", "link", "meta",
                                            "param", "source", "track", "wbr"};
const std::unordered_set<std::string> kRawText{"script", "style", "textarea", "title", "noscript"};
const std::unordered_set<std::string> kSelfNesting{"p", "li", "td", "th", "tr", "dt", "dd", "option"};
const std::unordered_set<std::string> kBoilerplateTags{
    "script", "style", "noscript", "nav",    "aside",  "footer", "form",
    "iframe", "svg",   "button",   "select", "template", "dialog", "head", "title"};
const std::unordered_set<std::string> kBlock{
    "p",      "div",   "section", "article", "main",  "header", "footer", "h1", "h2",
    "h3",     "h4",    "h5",      "h6",      "ul",    "ol",     "li",     "pre", "blockquote",
    "table",  "tr",    "td",      "th",      "dl",    "dt",     "dd",     "figure",
    "figcaption", "br", "hr",     "body",    "html",  "address", "details", "summary"};

class TreeBuilder {
public:
    explicit TreeBuilder(std::string_view html) : src_(html) {
        nodes_.push_back(Node{});
        nodes_[kRoot].tag = "#root";
    }

    std::vector<Node> build() {
        std::vector<std::size_t> stack{kRoot};
        std::size_t i = 0;
        while (i < src_.size()) {
            if (src_[i] != '<') {
                const auto next = src_.find('<', i);
                const auto end = next == std::string_view::npos ? src_.size() : next;
                add_text(stack.back(), src_.substr(i, end - i));
                i = end;
                continue;
            }
            if (src_.compare(i, 4, "<!--") == 0) {
                const auto end = src_.find("-->", i + 4);
                i = end == std::string_view::npos ? src_.size() : end + 3;
                continue;
            }
            if (i + 1 < src_.size() && (src_[i + 1] == '!' || src_[i + 1] == '?')) {
                const auto end = src_.find('>', i);
                i = end == std::string_view::npos ? src_.size() : end + 1;
                continue;
            }
            if (i + 1 < src_.size() && src_[i + 1] == '/') {
                const auto end = src_.find('>', i);
                const std::string name = tag_name(src_.substr(i + 2, (end == std::string_view::npos ? src_.size() : end) - i - 2));
                i = end == std::string_view::npos ? src_.size() : end + 1;
                close(stack, name);
                continue;
            }
            if (i + 1 >= src_.size() || !std::isalpha(static_cast<unsigned char>(src_[i + 1]))) {
                add_text(stack.back(), "<");
                ++i;
                continue;
            }
            const auto end = find_tag_end(i + 1);
            const std::string_view inner = src_.substr(i + 1, end - i - 1);
            i = end < src_.size() ? end + 1 : src_.size();
            const std::string name = tag_name(inner);
            const bool self_closing = !inner.empty() && inner.back() == '/';

            if (kSelfNesting.contains(name) && nodes_[stack.back()].tag == name) {
                stack.pop_back();
            }
            const std::size_t id = add_element(stack.back(), name, inner);
            if (kRawText.contains(name)) {
                const std::string closing = "</" + name;
                std::size_t close_at = i;
                while (true) {
                    close_at = src_.find('<', close_at);
                    if (close_at == std::string_view::npos ||
                        lower(src_.substr(close_at, closing.size())) == closing) {
                        break;
                    }
                    ++close_at;
                }
                const auto body_end = close_at == std::string_view::npos ? src_.size() : close_at;
                add_text(id, src_.substr(i, body_end - i));
                const auto gt = close_at == std::string_view::npos ? std::string_view::npos
                                                                    : src_.find('>', close_at);
                i = gt == std::string_view::npos ? src_.size() : gt + 1;
                continue;
            }
            if (!self_closing && !kVoid.contains(name)) {
                stack.push_back(id);
            }
        }
        return std::move(nodes_);
    }

private:
    std::size_t find_tag_end(std::size_t pos) const {
        char quote = 0;
        for (; pos < src_.size(); ++pos) {
            const char c = src_[pos];
            if (quote) {
                if (c == quote) {
                    quote = 0;
                }
            } else if (c == '"' || c == '\'') {
                quote = c;
            } else if (c == '>') {
                return pos;
            }
        }
        return src_.size();
    }

    static std::string tag_name(std::string_view inner) {
        std::size_t n = 0;
        while (n < inner.size() && (std::isalnum(static_cast<unsigned char>(inner[n])) ||
                                    inner[n] == '-' || inner[n] == ':')) {
            ++n;
        }
        return lower(inner.substr(0, n));
    }

    static std::map<std::string, std::string> parse_attrs(std::string_view inner) {
        static const std::regex attr_re{R"(([A-Za-z_:][-A-Za-z0-9_:.]*)\s*=\s*("[^"]*"|'[^']*'|[^\s"'>]+))"};
        std::map<std::string, std::string> attrs;
        const std::string s(inner);
        for (auto it = std::sregex_iterator(s.begin(), s.end(), attr_re); it != std::sregex_iterator();
             ++it) {
            std::string value = (*it)[2].str();
            if (!value.empty() && (value.front() == '"' || value.front() == '\'')) {
                value = value.substr(1, value.size() - 2);
            }
            attrs[lower((*it)[1].str())] = decode_entities(value);
        }
        return attrs;
    }

    void add_text(std::size_t parent, std::string_view text) {
        if (text.empty()) {
            return;
        }
        Node n;
        n.text = decode_entities(text);
        n.parent = parent;
        nodes_.push_back(std::move(n));
        nodes_[parent].children.push_back(nodes_.size() - 1);
    }

    std::size_t add_element(std::size_t parent, const std::string& name, std::string_view inner) {
        Node n;
        n.tag = name;
        n.parent = parent;
        const auto space = inner.find_first_of(" \t\r\n");
        if (space != std::string_view::npos) {
            n.attrs = parse_attrs(inner.substr(space));
        }
        nodes_.push_back(std::move(n));
        nodes_[parent].children.push_back(nodes_.size() - 1);
        return nodes_.size() - 1;
    }

    void close(std::vector<std::size_t>& stack, const std::string& name) {
        for (std::size_t k = stack.size(); k-- > 1;) {
            if (nodes_[stack[k]].tag == name) {
                stack.resize(k);
                return;
            }
        }
    }

    std::string_view src_;
    std::vector<Node> nodes_;
};

class Extractor {
public:
    explicit Extractor(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

    std::string run() {
        prune(kRoot, false);
        const std::size_t chosen = choose_container();
        std::string out;
        render(chosen, out, false);
        return tidy(out);
    }

    std::string fallback_text() {
        std::string out;
        for (const auto& n : nodes_) {
            if (n.tag.empty() && !is_raw_text_parent(n)) {
                out += n.text;
                out.push_back(' ');
            }
        }
        return tidy(collapse_whitespace(out));
    }

private:
    bool is_raw_text_parent(const Node& text_node) const {
        const std::string& parent_tag = nodes_[text_node.parent].tag;
        return parent_tag == "script" || parent_tag == "style" || parent_tag == "noscript" ||
               parent_tag == "title";
    }

    static std::string hints_of(const Node& n) {
        std::string h;
        for (const char* key : {"class", "id", "role"}) {
            if (const auto it = n.attrs.find(key); it != n.attrs.end()) {
                h += lower(it->second);
                h.push_back(' ');
            }
        }
        return h;
    }

    static bool is_unlikely(const Node& n) {
        static const std::regex negative{
            R"((^|[\s_-])(sidebar|side-bar|ad|ads|advert|advertisement|adsbygoogle|banner|sponsor|sponsored|promo|cookie|cookies|popup|modal|newsletter|subscribe|share|sharing|social|comments?|related|recommended|footer|menu|navbar|nav|navigation|breadcrumbs?|widget|masthead|pagination|complementary|contentinfo)([\s_-]|$))"};
        static const std::regex positive{
            R"((^|[\s_-])(article|content|post|entry|main|body|text|blog|story|writeup)([\s_-]|$))"};
        const std::string h = hints_of(n);
        if (h.empty()) {
            return false;
        }
        return std::regex_search(h, negative) && !std::regex_search(h, positive);
    }

    static int class_weight(const Node& n) {
        static const std::regex negative{
            R"((sidebar|advert|banner|sponsor|promo|comment|footer|menu|nav|share|social|related|widget))"};
        static const std::regex positive{R"((article|content|post|entry|main|body|text|blog|story))"};
        const std::string h = hints_of(n);
        int w = 0;
        if (std::regex_search(h, negative)) {
            w -= 25;
        }
        if (std::regex_search(h, positive)) {
            w += 25;
        }
        return w;
    }

    void prune(std::size_t id, bool inside_content) {
        Node& n = nodes_[id];
        const bool content_scope = inside_content || n.tag == "article" || n.tag == "main";
        if (!n.tag.empty() && id != kRoot) {
            if (kBoilerplateTags.contains(n.tag) || (n.tag == "header" && !inside_content) ||
                is_unlikely(n)) {
                n.removed = true;
                return;
            }
        }
        for (std::size_t c : n.children) {
            prune(c, content_scope);
        }
    }

    std::string inner_text(std::size_t id) const {
        std::string out;
        collect_text(id, out);
        return out;
    }

    void collect_text(std::size_t id, std::string& out) const {
        const Node& n = nodes_[id];
        if (n.removed) {
            return;
        }
        if (n.tag.empty()) {
            out += n.text;
            return;
        }
        for (std::size_t c : n.children) {
            collect_text(c, out);
        }
    }

    std::size_t link_text_length(std::size_t id) const {
        const Node& n = nodes_[id];
        if (n.removed) {
            return 0;
        }
        if (n.tag == "a") {
            return collapse_whitespace(inner_text(id)).size();
        }
        std::size_t total = 0;
        for (std::size_t c : n.children) {
            total += link_text_length(c);
        }
        return total;
    }

    bool is_live(std::size_t id) const {
        for (std::size_t cur = id; cur != kRoot; cur = nodes_[cur].parent) {
            if (nodes_[cur].removed) {
                return false;
            }
        }
        return true;
    }

    std::size_t choose_container() {
        std::vector<std::size_t> articles;
        std::vector<std::size_t> mains;
        for (std::size_t id = 1; id < nodes_.size(); ++id) {
            if (!is_live(id)) {
                continue;
            }
            if (nodes_[id].tag == "article") {
                articles.push_back(id);
            } else if (nodes_[id].tag == "main") {
                mains.push_back(id);
            }
        }
        if (articles.size() == 1) {
            return articles.front();
        }
        if (articles.empty() && mains.size() == 1) {
            return mains.front();
        }

        std::map<std::size_t, double> scores;
        auto initial = [&](std::size_t id) {
            const std::string& tag = nodes_[id].tag;
            double s = class_weight(nodes_[id]);
            if (tag == "div" || tag == "article" || tag == "main" || tag == "section") {
                s += 5;
            } else if (tag == "pre" || tag == "td" || tag == "blockquote") {
                s += 3;
            } else if (tag == "ol" || tag == "ul" || tag == "dl" || tag == "li" || tag == "form") {
                s -= 3;
            } else if (tag.size() == 2 && tag[0] == 'h' && std::isdigit(static_cast<unsigned char>(tag[1]))) {
                s -= 5;
            }
            return s;
        };
        for (std::size_t id = 1; id < nodes_.size(); ++id) {
            const std::string& tag = nodes_[id].tag;
            if (!(tag == "p" || tag == "pre" || tag == "td") || !is_live(id)) {
                continue;
            }
            const std::string text = collapse_whitespace(inner_text(id));
            if (text.size() < 25) {
                continue;
            }
            const double content_score = 1.0 + static_cast<double>(std::count(text.begin(), text.end(), ',')) +
                                         std::min(static_cast<double>(text.size()) / 100.0, 3.0);
            const std::size_t parent = nodes_[id].parent;
            if (parent == kRoot) {
                continue;
            }
            if (!scores.contains(parent)) {
                scores[parent] = initial(parent);
            }
            scores[parent] += content_score;
            const std::size_t grand = nodes_[parent].parent;
            if (grand != kRoot) {
                if (!scores.contains(grand)) {
                    scores[grand] = initial(grand);
                }
                scores[grand] += content_score / 2.0;
            }
        }
        std::size_t best = kRoot;
        double best_score = -1e300;
        for (const auto& [id, raw] : scores) {
            const std::string text = collapse_whitespace(inner_text(id));
            const double density =
                text.empty() ? 0.0 : static_cast<double>(link_text_length(id)) / static_cast<double>(text.size());
            const double score = raw * (1.0 - std::min(density, 1.0));
            if (score > best_score) {
                best_score = score;
                best = id;
            }
        }
        if (best != kRoot) {
            return best;
        }
        for (std::size_t id = 1; id < nodes_.size(); ++id) {
            if (nodes_[id].tag == "body" && is_live(id)) {
                return id;
            }
        }
        return kRoot;
    }

    static std::string collapse_whitespace(std::string_view s) {
        std::string out;
        bool space = false;
        for (char c : s) {
            if (std::isspace(static_cast<unsigned char>(c))) {
                space = true;
            } else {
                if (space && !out.empty()) {
                    out.push_back(' ');
                }
                space = false;
                out.push_back(c);
            }
        }
        return out;
    }

    void raw_text(std::size_t id, std::string& out) const {
        const Node& n = nodes_[id];
        if (n.tag.empty()) {
            out += n.text;
            return;
        }
        if (n.tag == "br") {
            out.push_back('\n');
        }
        for (std::size_t c : n.children) {
            raw_text(c, out);
        }
    }

    void render(std::size_t id, std::string& out, bool in_pre) const {
        const Node& n = nodes_[id];
        if (n.removed) {
            return;
        }
        if (n.tag.empty()) {
            out += n.text;
            return;
        }
        if (n.tag == "pre" && !in_pre) {
            std::string code;
            raw_text(id, code);
            while (!code.empty() && code.front() == '\n') {
                code.erase(code.begin());
            }
            while (!code.empty() && (code.back() == '\n' || code.back() == ' ')) {
                code.pop_back();
            }
            // Sentinels keep the block out of whitespace tidying.
            out += "\n\x01";
            out += code;
            out += "\x02\n";
            return;
        }
        const bool block = kBlock.contains(n.tag);
        if (block) {
            out.push_back('\n');
        }
        if (n.tag == "li") {
            out += "- ";
        }
        for (std::size_t c : n.children) {
            render(c, out, in_pre);
        }
        if (block) {
            out.push_back('\n');
        }
    }

    static std::string tidy(const std::string& text) {
        std::string out;
        std::string pending;
        auto flush_line = [&](bool allow_blank) {
            std::string line = collapse_whitespace(pending);
            pending.clear();
            if (line.empty()) {
                if (allow_blank && !out.empty() && !out.ends_with("\n\n")) {
                    out += "\n";
                }
                return;
            }
            out += line;
            out += "\n";
        };
        std::size_t i = 0;
        while (i < text.size()) {
            const char c = text[i];
            if (c == '\x01') {
                flush_line(false);
                const auto end = text.find('\x02', i + 1);
                const std::string code = text.substr(i + 1, end - i - 1);
                if (!out.empty() && !out.ends_with("\n\n")) {
                    out += "\n";
                }
                out += code;
                out += "\n\n";
                i = end == std::string::npos ? text.size() : end + 1;
                continue;
            }
            if (c == '\n') {
                flush_line(false);
            } else {
                pending.push_back(c);
            }
            ++i;
        }
        flush_line(false);
        while (!out.empty() && (out.back() == '\n' || out.back() == ' ')) {
            out.pop_back();
        }
        return out;
    }

    std::vector<Node> nodes_;
};

} // namespace

bool looks_like_html(std::string_view text) {
    static const std::regex tag_re{
        R"(<\s*(!doctype|html|head|body|div|p|span|article|section|main|pre|code|h[1-6]|a|br|table|ul|ol|li|nav|aside|footer|header|script|style)[\s>/])",
        std::regex::icase};
    return std::regex_search(text.begin(), text.end(), tag_re);
}

std::string extract_main_content(std::string_view html) {
    if (!looks_like_html(html)) {
        return std::string(html);
    }
    Extractor extractor(TreeBuilder(html).build());
    std::string text = extractor.run();
    if (text.empty()) {
        Extractor fallback(TreeBuilder(html).build());
        return fallback.fallback_text();
    }
    return text;
}

} // namespace aeas
