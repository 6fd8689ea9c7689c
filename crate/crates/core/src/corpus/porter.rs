//! Porter suffix-stripping stemmer (the original 1980 rule set).
//!
//! Operates on lowercase ASCII-alphabetic tokens only; anything containing a
//! digit or a non-ASCII character is returned unchanged, as are tokens of
//! one or two characters. The step structure, conditions, and rule tables
//! follow the classic reference implementation.

/// Stem a lowercase token.
pub fn stem(token: &str) -> String {
    if token.len() <= 2 || !token.bytes().all(|b| b.is_ascii_lowercase()) {
        return token.to_string();
    }
    let mut s = Stemmer {
        b: token.as_bytes().to_vec(),
        k: token.len() - 1,
        j: 0,
    };
    s.step1a();
    s.step1b();
    s.step1c();
    s.step2();
    s.step3();
    s.step4();
    s.step5();
    String::from_utf8(s.b[..=s.k].to_vec()).expect("ascii buffer")
}

struct Stemmer {
    b: Vec<u8>,
    /// Index of the last letter of the current word.
    k: usize,
    /// Length of the stem left once a suffix has matched.
    j: usize,
}

impl Stemmer {
    fn is_consonant(&self, i: usize) -> bool {
        match self.b[i] {
            b'a' | b'e' | b'i' | b'o' | b'u' => false,
            b'y' => i == 0 || !self.is_consonant(i - 1),
            _ => true,
        }
    }

    /// Measure of the stem b[0..j]: the number of vowel-consonant sequences.
    fn measure(&self) -> usize {
        let mut n = 0;
        let mut prev_vowel = false;
        for i in 0..self.j {
            let cons = self.is_consonant(i);
            if cons && prev_vowel {
                n += 1;
            }
            prev_vowel = !cons;
        }
        n
    }

    fn vowel_in_stem(&self) -> bool {
        (0..self.j).any(|i| !self.is_consonant(i))
    }

    fn double_consonant(&self, i: usize) -> bool {
        i >= 1 && self.b[i] == self.b[i - 1] && self.is_consonant(i)
    }

    /// consonant-vowel-consonant ending at i, final consonant not w, x, or y.
    fn cvc(&self, i: usize) -> bool {
        if i < 2 || !self.is_consonant(i) || self.is_consonant(i - 1) || !self.is_consonant(i - 2) {
            return false;
        }
        !matches!(self.b[i], b'w' | b'x' | b'y')
    }

    fn ends(&mut self, s: &[u8]) -> bool {
        if s.len() > self.k + 1 || &self.b[self.k + 1 - s.len()..=self.k] != s {
            return false;
        }
        self.j = self.k + 1 - s.len();
        true
    }

    fn set_to(&mut self, s: &[u8]) {
        self.b.truncate(self.j);
        self.b.extend_from_slice(s);
        self.k = self.j + s.len() - 1;
    }

    fn replace_if_measure(&mut self, s: &[u8]) {
        if self.measure() > 0 {
            self.set_to(s);
        }
    }

    fn step1a(&mut self) {
        if self.b[self.k] != b's' {
            return;
        }
        if self.ends(b"sses") {
            self.k -= 2;
        } else if self.ends(b"ies") {
            self.set_to(b"i");
        } else if self.b[self.k - 1] != b's' {
            self.k -= 1;
        }
    }

    fn step1b(&mut self) {
        if self.ends(b"eed") {
            if self.measure() > 0 {
                self.k -= 1;
            }
            return;
        }
        if !((self.ends(b"ed") || self.ends(b"ing")) && self.vowel_in_stem()) {
            return;
        }
        self.k = self.j - 1;
        if self.ends(b"at") {
            self.set_to(b"ate");
        } else if self.ends(b"bl") {
            self.set_to(b"ble");
        } else if self.ends(b"iz") {
            self.set_to(b"ize");
        } else if self.double_consonant(self.k) {
            if !matches!(self.b[self.k], b'l' | b's' | b'z') {
                self.k -= 1;
            }
        } else {
            self.j = self.k + 1;
            if self.measure() == 1 && self.cvc(self.k) {
                self.b.truncate(self.k + 1);
                self.b.push(b'e');
                self.k += 1;
            }
        }
    }

    fn step1c(&mut self) {
        if self.ends(b"y") && self.vowel_in_stem() {
            self.b[self.k] = b'i';
        }
    }

    fn step2(&mut self) {
        // Longest matching suffix decides the rule; rules fire under m > 0.
        const RULES: &[(&[u8], &[u8])] = &[
            (b"ational", b"ate"),
            (b"ization", b"ize"),
            (b"iveness", b"ive"),
            (b"fulness", b"ful"),
            (b"ousness", b"ous"),
            (b"tional", b"tion"),
            (b"biliti", b"ble"),
            (b"entli", b"ent"),
            (b"ousli", b"ous"),
            (b"alism", b"al"),
            (b"aliti", b"al"),
            (b"iviti", b"ive"),
            (b"ation", b"ate"),
            (b"enci", b"ence"),
            (b"anci", b"ance"),
            (b"izer", b"ize"),
            (b"abli", b"able"),
            (b"alli", b"al"),
            (b"ator", b"ate"),
            (b"eli", b"e"),
        ];
        for (suffix, replacement) in RULES {
            if self.ends(suffix) {
                self.replace_if_measure(replacement);
                return;
            }
        }
    }

    fn step3(&mut self) {
        const RULES: &[(&[u8], &[u8])] = &[
            (b"icate", b"ic"),
            (b"ative", b""),
            (b"alize", b"al"),
            (b"iciti", b"ic"),
            (b"ical", b"ic"),
            (b"ness", b""),
            (b"ful", b""),
        ];
        for (suffix, replacement) in RULES {
            if self.ends(suffix) {
                self.replace_if_measure(replacement);
                return;
            }
        }
    }

    fn step4(&mut self) {
        const SUFFIXES: &[&[u8]] = &[
            b"ement", b"ance", b"ence", b"able", b"ible", b"ment", b"ant", b"ent", b"ion", b"ism",
            b"ate", b"iti", b"ous", b"ive", b"ize", b"al", b"er", b"ic", b"ou",
        ];
        for suffix in SUFFIXES {
            if self.ends(suffix) {
                if *suffix == b"ion"
                    && (self.j == 0 || !matches!(self.b[self.j - 1], b's' | b't'))
                {
                    return;
                }
                if self.measure() > 1 {
                    self.k = self.j - 1;
                }
                return;
            }
        }
    }

    fn step5(&mut self) {
        self.j = self.k + 1;
        if self.b[self.k] == b'e' {
            let m = self.measure();
            if m > 1 || (m == 1 && !self.cvc(self.k - 1)) {
                self.k -= 1;
            }
        }
        if self.b[self.k] == b'l' && self.double_consonant(self.k) {
            self.j = self.k + 1;
            if self.measure() > 1 {
                self.k -= 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::stem;

    #[test]
    fn plural_rules() {
        assert_eq!(stem("caresses"), "caress");
        assert_eq!(stem("ponies"), "poni");
        assert_eq!(stem("ties"), "ti");
        assert_eq!(stem("caress"), "caress");
        assert_eq!(stem("cats"), "cat");
    }

    #[test]
    fn past_and_progressive() {
        assert_eq!(stem("feed"), "feed");
        assert_eq!(stem("agreed"), "agre");
        assert_eq!(stem("plastered"), "plaster");
        assert_eq!(stem("bled"), "bled");
        assert_eq!(stem("motoring"), "motor");
        assert_eq!(stem("sing"), "sing");
        assert_eq!(stem("conflated"), "conflat");
        assert_eq!(stem("troubled"), "troubl");
        assert_eq!(stem("sized"), "size");
        assert_eq!(stem("hopping"), "hop");
        assert_eq!(stem("tanned"), "tan");
        assert_eq!(stem("falling"), "fall");
        assert_eq!(stem("hissing"), "hiss");
        assert_eq!(stem("failing"), "fail");
        assert_eq!(stem("filing"), "file");
        assert_eq!(stem("dying"), "dy");
    }

    #[test]
    fn y_to_i() {
        assert_eq!(stem("happy"), "happi");
        assert_eq!(stem("sky"), "sky");
        assert_eq!(stem("policy"), "polici");
    }

    #[test]
    fn longer_suffixes() {
        assert_eq!(stem("relational"), "relat");
        assert_eq!(stem("conditional"), "condit");
        assert_eq!(stem("rational"), "ration");
        assert_eq!(stem("digitizer"), "digit");
        assert_eq!(stem("radically"), "radic");
        assert_eq!(stem("differently"), "differ");
        assert_eq!(stem("analogously"), "analog");
        assert_eq!(stem("operator"), "oper");
        assert_eq!(stem("feudalism"), "feudal");
        assert_eq!(stem("decisiveness"), "decis");
        assert_eq!(stem("hopefulness"), "hope");
        assert_eq!(stem("formality"), "formal");
        assert_eq!(stem("sensitivity"), "sensit");
        assert_eq!(stem("education"), "educ");
        assert_eq!(stem("university"), "univers");
        assert_eq!(stem("culture"), "cultur");
        assert_eq!(stem("study"), "studi");
        assert_eq!(stem("this"), "thi");
    }

    #[test]
    fn step_four_and_five() {
        assert_eq!(stem("revival"), "reviv");
        assert_eq!(stem("allowance"), "allow");
        assert_eq!(stem("inference"), "infer");
        assert_eq!(stem("airliner"), "airlin");
        assert_eq!(stem("adjustable"), "adjust");
        assert_eq!(stem("defensible"), "defens");
        assert_eq!(stem("replacement"), "replac");
        assert_eq!(stem("adjustment"), "adjust");
        assert_eq!(stem("dependent"), "depend");
        assert_eq!(stem("adoption"), "adopt");
        assert_eq!(stem("communism"), "commun");
        assert_eq!(stem("activate"), "activ");
        assert_eq!(stem("effective"), "effect");
        assert_eq!(stem("probate"), "probat");
        assert_eq!(stem("rate"), "rate");
        assert_eq!(stem("cease"), "ceas");
        assert_eq!(stem("controlling"), "control");
        assert_eq!(stem("rolling"), "roll");
        assert_eq!(stem("element"), "element");
    }

    #[test]
    fn cascade() {
        assert_eq!(stem("generalizations"), "gener");
        assert_eq!(stem("oscillators"), "oscil");
    }

    #[test]
    fn whole_word_suffix_matches() {
        assert_eq!(stem("ies"), "i");
        assert_eq!(stem("ing"), "ing");
        assert_eq!(stem("ate"), "at");
        assert_eq!(stem("ness"), "ness");
    }

    #[test]
    fn short_and_non_alphabetic_tokens_unchanged() {
        assert_eq!(stem("run"), "run");
        assert_eq!(stem("go"), "go");
        assert_eq!(stem("a"), "a");
        assert_eq!(stem("2008"), "2008");
        assert_eq!(stem("h1n1"), "h1n1");
        assert_eq!(stem("naïve"), "naïve");
        assert_eq!(stem(""), "");
    }
}
