// SPDX-License-Identifier: Apache-2.0

use std::io::{self, Write};

/// One sample of a closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub xd: f64,
    pub x: f64,
    /// Proxy position; NaN for controllers without a proxy.
    pub xp: f64,
    pub u: f64,
    pub sq: f64,
    /// NaN for controllers without a proxy.
    pub sp: f64,
    /// Injected disturbance.
    pub tau: f64,
    pub tau_hat: f64,
    pub taudot_hat: f64,
    pub saturated: bool,
}

impl TraceRow {
    pub fn abs_error(&self) -> f64 {
        (self.xd - self.x).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimTrace {
    pub dt: f64,
    pub rows: Vec<TraceRow>,
}

pub const TRACE_HEADER: &str = "t,x_d,x,x_p,u,S_q,S_p,tau,tau_hat,taudot_hat,saturated";

impl SimTrace {
    pub fn new(dt: f64) -> Self {
        Self { dt, rows: Vec::new() }
    }

    pub fn with_capacity(dt: f64, n: usize) -> Self {
        Self {
            dt,
            rows: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Index range of samples whose time lies in `[start, end]`.
    pub fn window_indices(&self, start: f64, end: f64) -> std::ops::Range<usize> {
        if self.rows.is_empty() || !(self.dt > 0.0) {
            return 0..0;
        }
        let slack = 1e-9;
        let first = ((start / self.dt) - slack).ceil().max(0.0) as usize;
        let last = ((end / self.dt) + slack).floor();
        if last < 0.0 {
            return 0..0;
        }
        let stop = (last as usize + 1).min(self.rows.len());
        first.min(stop)..stop
    }

    pub fn window(&self, start: f64, end: f64) -> &[TraceRow] {
        &self.rows[self.window_indices(start, end)]
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "{TRACE_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                fmt_g(r.t),
                fmt_g(r.xd),
                fmt_g(r.x),
                fmt_g(r.xp),
                fmt_g(r.u),
                fmt_g(r.sq),
                fmt_g(r.sp),
                fmt_g(r.tau),
                fmt_g(r.tau_hat),
                fmt_g(r.taudot_hat),
                u8::from(r.saturated)
            )?;
        }
        Ok(())
    }
}

/// Twelve significant digits, fixed notation for moderate exponents and
/// scientific otherwise (C's `%.12g`).
pub fn fmt_g(v: f64) -> String {
    const DIGITS: i32 = 12;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..DIGITS).contains(&exp) {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_format() {
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(0.015), "0.015");
        assert_eq!(fmt_g(-212.13), "-212.13");
        assert_eq!(fmt_g(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g(29421.6366158), "29421.6366158");
        assert_eq!(fmt_g(1.5e-7), "1.5e-07");
        assert_eq!(fmt_g(6.0e12), "6e+12");
        assert_eq!(fmt_g(f64::NAN), "nan");
    }

    #[test]
    fn window_bounds_inclusive() {
        let mut tr = SimTrace::new(0.5);
        for i in 0..=8 {
            tr.rows.push(TraceRow {
                t: i as f64 * 0.5,
                xd: 0.0,
                x: 0.0,
                xp: 0.0,
                u: 0.0,
                sq: 0.0,
                sp: 0.0,
                tau: 0.0,
                tau_hat: 0.0,
                taudot_hat: 0.0,
                saturated: false,
            });
        }
        assert_eq!(tr.window_indices(1.0, 2.0), 2..5);
        assert_eq!(tr.window_indices(0.0, 100.0), 0..9);
        assert_eq!(tr.window_indices(0.9, 1.1), 2..3);
        assert!(tr.window(5.0, 6.0).is_empty());
    }
}
