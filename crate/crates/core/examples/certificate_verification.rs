//! Writes a certificate to disk, reads it back, and shows how tampering is caught.

use rapidseries::charpoly::WeightVector;
use rapidseries::construct::{construct, verify_certificate, Certificate};
use rapidseries::enclosure::Precision;
use rapidseries::numeric::rat;

fn main() -> rapidseries::Result<()> {
    let w = WeightVector::parse("1,0,2,1")?;
    let (_, cert) = construct(&w, &rat(2, 1), None, 12, &Precision::default())?;

    let path = std::env::temp_dir().join("rapidseries-example-certificate.json");
    std::fs::write(&path, cert.to_json())?;
    let back = Certificate::read(&path)?;
    println!("{}: {:?}", path.display(), verify_certificate(&back)?);

    let mut tampered = back.clone();
    tampered.target = "1/3".into();
    println!("target replaced: {:?}", verify_certificate(&tampered)?);

    let mut tampered = back;
    tampered.terms.pop();
    println!("last term dropped: {:?}", verify_certificate(&tampered)?);
    Ok(())
}
