/// Delta debugging: shrinks `input` to a 1-minimal subsequence for which
/// `fails` still holds. `fails(input)` is assumed true.
pub fn ddmin<T: Clone>(mut input: Vec<T>, mut fails: impl FnMut(&[T]) -> bool) -> Vec<T> {
    let mut n = 2usize;
    while input.len() >= 2 {
        let chunk = input.len().div_ceil(n);
        let parts: Vec<Vec<T>> = input.chunks(chunk).map(|c| c.to_vec()).collect();
        let mut reduced = false;
        for part in &parts {
            if fails(part) {
                input = part.clone();
                n = 2;
                reduced = true;
                break;
            }
        }
        if !reduced {
            for i in 0..parts.len() {
                let complement: Vec<T> = parts
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .flat_map(|(_, p)| p.iter().cloned())
                    .collect();
                if fails(&complement) {
                    input = complement;
                    n = (n - 1).max(2);
                    reduced = true;
                    break;
                }
            }
        }
        if !reduced {
            if n >= input.len() {
                break;
            }
            n = (n * 2).min(input.len());
        }
    }
    input
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_the_pair() {
        let input: Vec<u32> = (0..40).collect();
        let out = ddmin(input, |s| s.contains(&7) && s.contains(&31));
        assert_eq!(out, vec![7, 31]);
    }

    #[test]
    fn result_is_one_minimal() {
        let fails = |s: &[u32]| s.iter().filter(|x| *x % 3 == 0).count() >= 3;
        let out = ddmin((0..30).collect(), fails);
        assert!(fails(&out));
        for i in 0..out.len() {
            let mut smaller = out.clone();
            smaller.remove(i);
            assert!(!fails(&smaller));
        }
    }
}
