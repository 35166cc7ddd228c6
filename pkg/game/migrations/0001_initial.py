# Generated by Django 4.2.16 on 2026-10-17 09:00

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='RunRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('scenario_id', models.CharField(db_index=True, max_length=100)),
                ('eps', models.FloatField()),
                ('status', models.CharField(choices=[('ok', 'Converged'), ('failed', 'Convergence failure')], default='ok', max_length=10)),
                ('z', models.JSONField(default=list)),
                ('h', models.JSONField(default=list)),
                ('nu1', models.JSONField(default=list)),
                ('nu_m1', models.JSONField(default=list)),
                ('value_eps', models.FloatField(blank=True, null=True)),
                ('dual_eps', models.FloatField(blank=True, null=True)),
                ('gap_eps', models.FloatField(blank=True, null=True)),
                ('upper_t0', models.FloatField(blank=True, null=True, verbose_name='Upper value T0')),
                ('lower_unreg', models.FloatField(blank=True, null=True)),
                ('gap_unreg', models.FloatField(blank=True, null=True)),
                ('iterations', models.PositiveIntegerField(default=0)),
                ('grad_norm', models.FloatField(blank=True, null=True)),
                ('max_abs_h', models.FloatField(blank=True, null=True)),
                ('lipschitz', models.FloatField(blank=True, null=True)),
                ('wall_time', models.FloatField(default=0.0, help_text='Seconds spent solving and certifying.')),
                ('classifier_csv', models.CharField(blank=True, max_length=500)),
                ('created', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['scenario_id', '-eps'],
            },
        ),
    ]
