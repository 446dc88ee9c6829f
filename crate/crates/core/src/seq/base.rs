use std::fmt;

/// A called nucleotide. `N` marks an undetermined call and never appears inside a packed kmer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Base {
    A,
    C,
    G,
    T,
    N,
}

impl Base {
    pub const ACGT: [Base; 4] = [Base::A, Base::C, Base::G, Base::T];

    /// 2-bit code (A=0, C=1, G=2, T=3); `None` for `N`.
    #[inline]
    pub fn code(self) -> Option<u8> {
        match self {
            Base::A => Some(0),
            Base::C => Some(1),
            Base::G => Some(2),
            Base::T => Some(3),
            Base::N => None,
        }
    }

    #[inline]
    pub fn from_code(code: u8) -> Base {
        Base::ACGT[(code & 3) as usize]
    }

    #[inline]
    pub fn from_ascii(c: u8) -> Option<Base> {
        match c {
            b'A' | b'a' => Some(Base::A),
            b'C' | b'c' => Some(Base::C),
            b'G' | b'g' => Some(Base::G),
            b'T' | b't' => Some(Base::T),
            b'N' | b'n' | b'.' => Some(Base::N),
            _ => None,
        }
    }

    pub fn to_ascii(self) -> u8 {
        match self {
            Base::A => b'A',
            Base::C => b'C',
            Base::G => b'G',
            Base::T => b'T',
            Base::N => b'N',
        }
    }

    pub fn to_char(self) -> char {
        self.to_ascii() as char
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}
