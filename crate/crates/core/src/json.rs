//! JSON output with every float printed to 17 significant digits, so that
//! reports re-parse to the same bits and reruns compare bytewise.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, Serializer};

struct Digits17;

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_string<T: Serialize + ?Sized>(value: &T) -> serde_json::Result<String> {
    let mut out = Vec::new();
    let mut ser = Serializer::with_formatter(&mut out, Digits17);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serializer emits UTF-8"))
}

/// 17 significant digits, as used in CSV output.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

/// 9 significant digits for human-readable tables.
pub fn fmt9(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..9).contains(&mag) {
        format!("{:.*}", (8 - mag) as usize, x)
    } else {
        format!("{x:.8e}")
    }
}
