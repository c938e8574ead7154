/// Characters of the 22-character compressed GlobalId encoding.
const ALPHABET: &[u8; 64] = b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz_$";

/// Deterministic GlobalId source: splitmix64 drawn in pairs.
#[derive(Debug, Clone)]
pub struct GuidGen {
    state: u64,
}

impl GuidGen {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn next_guid(&mut self) -> String {
        let value = (u128::from(self.next_u64()) << 64) | u128::from(self.next_u64());
        encode(value)
    }
}

/// 2 bits in the first character, then 21 characters of 6 bits.
pub fn encode(value: u128) -> String {
    let mut out = String::with_capacity(22);
    out.push(ALPHABET[(value >> 126) as usize] as char);
    for k in (0..21).rev() {
        out.push(ALPHABET[((value >> (6 * k)) & 63) as usize] as char);
    }
    out
}
