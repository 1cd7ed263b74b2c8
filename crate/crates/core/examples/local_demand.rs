//! Each user's best response to a broadcast price.
//!
//! A user with utility `U(q) = −k‖q − s‖²` buys `q = s − p/(2k)`: its bliss
//! point at zero price, less as the price rises.
//!
//! ```bash
//! cargo run --example local_demand
//! ```

use od3::model::{numeric_inverse_gradient, BoundingBox};
use od3::roots::Tolerance;
use od3::{local_demand, QuadraticUtility, Utility};

fn main() -> od3::Result<()> {
    let user = QuadraticUtility::new(vec![3.0, 5.0], 1.0)?;
    println!("target s = {:?}, sigma = {}, L = {}", user.target, user.sigma(), user.lipschitz_grad());

    for price in [[0.0, 0.0], [2.0, 2.0], [4.0, 1.0], [8.0, 12.0]] {
        let q = local_demand(&user, &price);
        let numeric = numeric_inverse_gradient(&user, &price, &Tolerance::default())?;
        println!(
            "p = {:?} -> q = {:?} (bisection {:?}), utility {:.3}, surplus {:.3}",
            price,
            q,
            numeric,
            user.value(&q),
            user.value(&q) - price.iter().zip(&q).map(|(p, x)| p * x).sum::<f64>()
        );
    }

    let steep = QuadraticUtility::new(vec![3.0], 4.0)?;
    println!("scale 4 at p = 4: q = {:?}", local_demand(&steep, &[4.0]));

    let domain = BoundingBox::from_points([[0.0, 0.0].as_slice(), [6.0, 6.0].as_slice()]).unwrap();
    println!("value-Lipschitz constant on {:?}: {:.4}", domain, user.lipschitz_value_on(&domain));
    Ok(())
}
