use super::{ConvexSpec, Coord, Frame, ParseError, RegionSpec};

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Word(String),
    Number(f64),
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
    text: String,
}

fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        // token boundaries fall on ASCII whitespace, so slicing is safe
        let raw = &text[start..i];
        let first = raw.chars().next().unwrap();
        let kind = if first.is_ascii_alphabetic() {
            if !raw.chars().all(|c| c.is_ascii_alphanumeric()) {
                return Err(ParseError {
                    offset: start,
                    message: format!("invalid keyword '{raw}'"),
                });
            }
            TokenKind::Word(raw.to_ascii_uppercase())
        } else if is_decimal(raw) {
            let v: f64 = raw.parse().map_err(|_| ParseError {
                offset: start,
                message: format!("invalid number '{raw}'"),
            })?;
            if !v.is_finite() {
                return Err(ParseError {
                    offset: start,
                    message: format!("number '{raw}' is out of range"),
                });
            }
            TokenKind::Number(v)
        } else {
            return Err(ParseError {
                offset: start,
                message: format!("unexpected token '{raw}'"),
            });
        };
        tokens.push(Token {
            kind,
            offset: start,
            text: raw.to_string(),
        });
    }
    Ok(tokens)
}

/// `[+-]? (digits [. digits?] | . digits) ([eE] [+-]? digits)?`
fn is_decimal(s: &str) -> bool {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return false;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return false;
        }
    }
    i == b.len()
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    input: &'a str,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.input.len(), |t| t.offset)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            offset: self.here(),
            message: message.into(),
        })
    }

    fn error_at<T>(&self, offset: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            offset,
            message: message.into(),
        })
    }

    fn keyword(&mut self, expected: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Word(w),
                ..
            }) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            Some(t) => self.error(format!("expected {expected}, found '{}'", t.text)),
            None => self.error(format!("expected {expected}, found end of input")),
        }
    }

    fn number(&mut self) -> Result<f64, ParseError> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Number(v),
                ..
            }) => {
                let v = *v;
                self.pos += 1;
                Ok(v)
            }
            Some(t) => self.error(format!("expected number, found '{}'", t.text)),
            None => self.error("expected number, found end of input"),
        }
    }

    fn numbers<const N: usize>(&mut self) -> Result<[f64; N], ParseError> {
        let mut out = [0.0; N];
        for slot in &mut out {
            *slot = self.number()?;
        }
        Ok(out)
    }

    /// All numbers up to the next keyword or end of input.
    fn number_run(&mut self) -> Vec<f64> {
        let mut out = Vec::new();
        while let Some(Token {
            kind: TokenKind::Number(v),
            ..
        }) = self.peek()
        {
            out.push(*v);
            self.pos += 1;
        }
        out
    }

    fn frame(&mut self) -> Result<Frame, ParseError> {
        let offset = self.here();
        match self.keyword("frame J2000 or CARTESIAN")?.as_str() {
            "J2000" => Ok(Frame::J2000),
            "CARTESIAN" => Ok(Frame::Cartesian),
            other => self.error_at(offset, format!("unknown frame '{other}', expected J2000 or CARTESIAN")),
        }
    }

    fn point_list(&mut self, shape: &str, frame: Frame) -> Result<Vec<Coord>, ParseError> {
        let offset = self.here();
        let nums = self.number_run();
        let arity = match frame {
            Frame::J2000 => 2,
            Frame::Cartesian => 3,
        };
        if nums.len() % arity != 0 {
            return self.error_at(
                offset,
                format!("{shape} {frame} needs groups of {arity} numbers, got {}", nums.len()),
            );
        }
        if nums.len() / arity < 3 {
            return self.error_at(
                offset,
                format!("{shape} needs at least 3 points, got {}", nums.len() / arity),
            );
        }
        Ok(nums
            .chunks(arity)
            .map(|c| match frame {
                Frame::J2000 => Coord::Sky { ra: c[0], dec: c[1] },
                Frame::Cartesian => Coord::Cartesian {
                    x: c[0],
                    y: c[1],
                    z: c[2],
                },
            })
            .collect())
    }

    fn convex_body(&mut self, allow_empty: bool) -> Result<ConvexSpec, ParseError> {
        let offset = self.here();
        let nums = self.number_run();
        if nums.len() % 4 != 0 {
            return self.error_at(
                offset,
                format!("CONVEX needs groups of 4 numbers (x y z d), got {}", nums.len()),
            );
        }
        if nums.is_empty() && !allow_empty {
            return self.error_at(offset, "CONVEX needs at least one x y z d constraint");
        }
        Ok(ConvexSpec {
            constraints: nums.chunks(4).map(|c| [c[0], c[1], c[2], c[3]]).collect(),
        })
    }

    fn area(&mut self) -> Result<RegionSpec, ParseError> {
        let offset = self.here();
        let kw = self.keyword("CIRCLE, RECT, POLY, CHULL, CONVEX or REGION")?;
        match kw.as_str() {
            "CIRCLE" => {
                let frame = self.frame()?;
                let center = match frame {
                    Frame::J2000 => {
                        let [ra, dec] = self.numbers::<2>()?;
                        Coord::Sky { ra, dec }
                    }
                    Frame::Cartesian => {
                        let [x, y, z] = self.numbers::<3>()?;
                        Coord::Cartesian { x, y, z }
                    }
                };
                let radius_arcmin = self.number()?;
                Ok(RegionSpec::Circle {
                    frame,
                    center,
                    radius_arcmin,
                })
            }
            "RECT" => {
                let frame_offset = self.here();
                if self.frame()? != Frame::J2000 {
                    return self.error_at(frame_offset, "RECT only supports the J2000 frame");
                }
                let [ra1, dec1, ra2, dec2] = self.numbers::<4>()?;
                Ok(RegionSpec::Rect {
                    corners: [(ra1, dec1), (ra2, dec2)],
                })
            }
            "POLY" => {
                let frame = self.frame()?;
                let points = self.point_list("POLY", frame)?;
                Ok(RegionSpec::Poly { frame, points })
            }
            "CHULL" => {
                let frame = self.frame()?;
                let points = self.point_list("CHULL", frame)?;
                Ok(RegionSpec::Chull { frame, points })
            }
            "CONVEX" => Ok(RegionSpec::Convex(self.convex_body(false)?)),
            "REGION" => {
                let mut convexes = Vec::new();
                while self.peek().is_some() {
                    let kw_offset = self.here();
                    let kw = self.keyword("CONVEX")?;
                    if kw != "CONVEX" {
                        return self.error_at(kw_offset, format!("expected CONVEX, found '{kw}'"));
                    }
                    convexes.push(self.convex_body(true)?);
                }
                Ok(RegionSpec::Region(convexes))
            }
            other => self.error_at(offset, format!("unknown shape '{other}'")),
        }
    }
}

/// Parses one area specification. The whole input must be consumed.
pub fn parse(text: &str) -> Result<RegionSpec, ParseError> {
    let tokens = tokenize(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        input: text,
    };
    let spec = p.area()?;
    if let Some(t) = p.peek() {
        return p.error(format!("unexpected trailing input '{}'", t.text));
    }
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn three_arcmin_circle() {
        assert_eq!(
            parse("CIRCLE J2000 30 20 3").unwrap(),
            RegionSpec::Circle {
                frame: Frame::J2000,
                center: Coord::Sky { ra: 30.0, dec: 20.0 },
                radius_arcmin: 3.0
            }
        );
    }

    #[test]
    fn octant_polygon() {
        let RegionSpec::Poly { frame, points } = parse("POLY J2000 0 0 0 90 180 0").unwrap() else {
            panic!("expected POLY");
        };
        assert_eq!(frame, Frame::J2000);
        assert_eq!(
            points,
            vec![
                Coord::Sky { ra: 0.0, dec: 0.0 },
                Coord::Sky { ra: 0.0, dec: 90.0 },
                Coord::Sky { ra: 180.0, dec: 0.0 }
            ]
        );
    }

    #[test]
    fn cartesian_circle() {
        assert_eq!(
            parse("CIRCLE CARTESIAN 1 0 0 3").unwrap(),
            RegionSpec::Circle {
                frame: Frame::Cartesian,
                center: Coord::Cartesian { x: 1.0, y: 0.0, z: 0.0 },
                radius_arcmin: 3.0
            }
        );
    }

    #[test]
    fn case_and_whitespace_insensitive() {
        let a = parse("  circle\tj2000\n30   20 3 ").unwrap();
        assert_eq!(a, parse("CIRCLE J2000 30 20 3").unwrap());
        assert!(parse("convex 0 0 1 -0.5e-1").is_ok());
        assert!(parse("CONVEX +.5 0 1 0").is_ok());
    }

    #[test]
    fn arity_errors() {
        let e = parse("POLY J2000 0 0 10 0").unwrap_err();
        assert_eq!(e.offset, 11);
        assert!(e.message.contains("at least 3 points"));
        assert!(parse("POLY J2000 0 0 10 0 5").is_err());
        assert!(parse("POLY CARTESIAN 1 0 0 0 1 0 0 0").is_err());
        assert!(parse("RECT J2000 0 0 10").is_err());
        assert!(parse("CONVEX 0 0 1").is_err());
        assert!(parse("CONVEX").is_err());
        assert!(parse("CIRCLE J2000 30 20").is_err());
    }

    #[test]
    fn frame_errors() {
        let e = parse("CIRCLE GALACTIC 30 20 3").unwrap_err();
        assert_eq!(e.offset, 7);
        assert!(e.message.contains("unknown frame"));
        assert!(parse("RECT CARTESIAN 0 0 1 1").is_err());
    }

    #[test]
    fn token_errors() {
        assert_eq!(parse("").unwrap_err().offset, 0);
        let e = parse("CIRCLE J2000 30 2x0 3").unwrap_err();
        assert_eq!(e.offset, 16);
        assert!(parse("CIRCLE J2000 30 20 3 extra").is_err());
        assert!(parse("CIRCLE J2000 30 20 3 4").is_err());
        assert!(parse("TRIANGLE J2000 0 0").is_err());
        assert!(parse("REGION CIRCLE J2000 0 0 1").is_err());
        assert!(parse("CIRCLE J2000 1e999 0 1").is_err());
        assert!(parse("CIRCLE J2000 - 0 1").is_err());
        assert!(parse("CIRCLE J2000 1e 0 1").is_err());
    }

    #[test]
    fn region_lists() {
        let RegionSpec::Region(cs) =
            parse("REGION CONVEX 0 0 1 0 CONVEX 1 0 0 0 0 1 0 0.5").unwrap()
        else {
            panic!()
        };
        assert_eq!(cs.len(), 2);
        assert_eq!(cs[1].constraints.len(), 2);
    }

    #[test]
    fn number_syntax() {
        for ok in ["0", "-1", "+2.5", ".5", "5.", "1e3", "1E-3", "-0.25e+2"] {
            assert!(is_decimal(ok), "{ok}");
        }
        for bad in ["", "-", ".", "e5", "1e", "1.2.3", "0x10", "1_000", "--1"] {
            assert!(!is_decimal(bad), "{bad}");
        }
    }

    proptest! {
        #[test]
        fn parser_never_panics(s in "\\PC{0,60}") {
            let _ = parse(&s);
        }

        #[test]
        fn parser_never_panics_on_grammar_soup(
            words in proptest::collection::vec(
                prop_oneof![
                    Just("CIRCLE".to_string()), Just("POLY".to_string()), Just("RECT".to_string()),
                    Just("CHULL".to_string()), Just("CONVEX".to_string()), Just("REGION".to_string()),
                    Just("J2000".to_string()), Just("CARTESIAN".to_string()),
                    (-400.0f64..400.0).prop_map(|v| v.to_string()),
                ],
                0..20,
            )
        ) {
            let text = words.join(" ");
            match parse(&text) {
                Ok(_) => {}
                Err(e) => prop_assert!(e.offset <= text.len()),
            }
        }
    }
}
