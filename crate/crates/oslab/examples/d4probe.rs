fn phi(y: f64) -> f64 { y / (1.0 + y) }
fn main() {
    let f = |y: f64| phi(y).powi(3) * (-y).exp();
    // golden section
    let (mut a, mut b) = (0.0f64, 6.0f64);
    for _ in 0..200 {
        let c = b - 0.618_033_988_749_894_9 * (b - a);
        let d = a + 0.618_033_988_749_894_9 * (b - a);
        if f(c) > f(d) { b = d; } else { a = c; }
    }
    let y_star = (13.0f64.sqrt() - 1.0) / 2.0;
    println!("golden argmax {:.9} value {:.12}", 0.5*(a+b), f(0.5*(a+b)));
    println!("closed  argmax {:.9} value {:.12}", y_star, f(y_star));
}
